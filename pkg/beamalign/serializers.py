import math

from rest_framework import serializers

from .models import Experimento, Execucao
from .services.policies import BS, UE, POLICY_CHOICES
from .services.simulator import ERROR_MODES


# ============================================
# CONFIGURAÇÃO DE EXPERIMENTO
# ============================================

def _lista_floats(texto, campo):
    """'1, 8,15' -> [1.0, 8.0, 15.0]"""
    if isinstance(texto, (list, tuple)):
        itens = texto
    else:
        itens = [p for p in str(texto).split(',') if p.strip()]
    try:
        return [float(p) for p in itens]
    except (TypeError, ValueError):
        raise serializers.ValidationError({campo: f"Lista numérica inválida: {texto!r}"})


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Esquema único de configuração (arquivo key = value e corpo JSON da API).

    Padrões seguem o cenário de referência: 30 GHz, d = 10 m, T_fr = 20 ms,
    N = 200 slots, T_B = T_F = 50 µs, W = 500 MHz, N0 = -173 dBm/Hz.
    """

    # Canal e enlace
    carrier_frequency_hz = serializers.FloatField(default=30e9, min_value=1.0, help_text='Hz')
    distance_m = serializers.FloatField(default=10.0, min_value=1e-3, help_text='m')
    path_loss_exponent = serializers.FloatField(default=2.0, min_value=0.0, help_text='adimensional')
    noise_psd_dbm_hz = serializers.FloatField(default=-173.0, help_text='dBm/Hz')
    bandwidth_hz = serializers.FloatField(default=500e6, min_value=1.0, help_text='Hz')
    gamma_hat = serializers.FloatField(default=0.0, min_value=0.0, help_text='|ĥ|², linear')
    sigma_e2 = serializers.FloatField(
        default=None, allow_null=True, min_value=0.0,
        help_text='variância do erro de estimação, linear (vazio: 1/ℓ(d))'
    )
    channel = serializers.ChoiceField(
        choices=['rayleigh', 'los'], default='rayleigh',
        help_text='los: γ̂ = 1/ℓ(d) e σ_e² = 0 (visada direta sem erro de estimação)'
    )
    clusters = serializers.ChoiceField(choices=[1, 2], default=1, help_text='K')
    weak_cluster_fraction = serializers.FloatField(default=0.0, min_value=0.0, max_value=0.499999, help_text='ϱ')
    antennas_bs = serializers.IntegerField(default=128, min_value=1, help_text='só documentação')
    antennas_ue = serializers.IntegerField(default=128, min_value=1, help_text='só documentação')

    # Quadro e protocolo
    frame_s = serializers.FloatField(default=20e-3, min_value=1e-9, help_text='s')
    slots = serializers.IntegerField(default=200, min_value=1, help_text='N')
    beacon_s = serializers.FloatField(default=50e-6, min_value=1e-12, help_text='s')
    feedback_s = serializers.FloatField(default=50e-6, min_value=1e-12, help_text='s')
    epsilon = serializers.FloatField(default=0.01, min_value=1e-9, max_value=0.999999, help_text='probabilidade')
    rmin_bps = serializers.FloatField(default=7.5e9, min_value=0.0, help_text='bits/s')
    spectral_efficiency = serializers.FloatField(
        default=None, allow_null=True, min_value=0.0,
        help_text='bits/s/Hz; quando presente R_min = SE·W'
    )
    l_max = serializers.IntegerField(default=14, min_value=0, help_text='slots')
    ut0_lo = serializers.FloatField(default=-math.pi / 2, help_text='rad')
    ut0_hi = serializers.FloatField(default=math.pi / 2, help_text='rad')
    ur0_lo = serializers.FloatField(default=-math.pi / 2, help_text='rad')
    ur0_hi = serializers.FloatField(default=math.pi / 2, help_text='rad')
    beta_start = serializers.ChoiceField(choices=[BS, UE], default=BS)
    prior_t = serializers.CharField(default='', allow_blank=True, help_text='pesos w1,w2,... (vazio: uniforme)')
    prior_r = serializers.CharField(default='', allow_blank=True, help_text='pesos w1,w2,... (vazio: uniforme)')

    # Detecção
    pe = serializers.FloatField(default=1e-5, min_value=1e-300, help_text='probabilidade')
    p_fa = serializers.FloatField(default=None, allow_null=True, min_value=0.0, max_value=0.999999)
    p_md = serializers.FloatField(default=None, allow_null=True, min_value=0.0, max_value=0.999999)
    phi_s_dbm = serializers.FloatField(
        default=-94.0, allow_null=True,
        help_text='dBm por rad² (energia-piso calibrada); vazio usa a fórmula com ν*'
    )
    phi_s_reference_pe = serializers.FloatField(default=1e-5, min_value=1e-300, max_value=0.499999)
    symbol_energy = serializers.FloatField(default=1.0, min_value=1e-300, help_text='‖s‖²')
    symbol_time_s = serializers.FloatField(default=1e-9, min_value=1e-300, help_text='s')

    # Políticas e simulação
    policy = serializers.ChoiceField(choices=list(POLICY_CHOICES), default='dfs')
    policies = serializers.CharField(default='dfs,bisection,ies,ces')
    error_mode = serializers.ChoiceField(choices=list(ERROR_MODES), default='none')
    nb_bs = serializers.IntegerField(default=32, min_value=1)
    nb_ue = serializers.IntegerField(default=32, min_value=1)
    bisection_levels = serializers.IntegerField(default=10, min_value=0)
    bisection_cmp_error = serializers.FloatField(default=None, allow_null=True, min_value=0.0, max_value=1.0)
    trials = serializers.IntegerField(default=1000, min_value=1)
    seed = serializers.IntegerField(default=0, min_value=0)
    output = serializers.CharField(default='', allow_blank=True)

    # Varreduras
    sweep_variable = serializers.ChoiceField(choices=['pe'], default='pe')
    sweep_min = serializers.FloatField(default=1e-8)
    sweep_max = serializers.FloatField(default=1e-1)
    sweep_points = serializers.IntegerField(default=29, min_value=1)
    sweep_scale = serializers.ChoiceField(choices=['log', 'linear'], default='log')
    se_grid = serializers.CharField(default='1,8,15')
    weak_fractions = serializers.CharField(default='0,0.05,0.1')

    def validate(self, attrs):
        for prefixo in ('ut0', 'ur0'):
            lo, hi = attrs[f'{prefixo}_lo'], attrs[f'{prefixo}_hi']
            if not -math.pi <= lo < hi <= math.pi:
                raise serializers.ValidationError({f'{prefixo}_lo': f"Intervalo [{lo}, {hi}) fora de (-π, π]"})
        if not 0 < attrs['pe'] < 0.5:
            raise serializers.ValidationError({'pe': "p_e deve estar em (0, 0.5)"})
        if attrs['frame_s'] / attrs['slots'] < attrs['beacon_s'] + attrs['feedback_s'] - 1e-15:
            raise serializers.ValidationError({'slots': "Slot T_fr/N não comporta beacon + feedback"})
        if attrs['bisection_levels'] > attrs['l_max']:
            raise serializers.ValidationError({'bisection_levels': "Não pode exceder l_max"})
        if attrs['sweep_min'] >= attrs['sweep_max']:
            raise serializers.ValidationError({'sweep_min': "Deve ser menor que sweep_max"})
        if attrs['sweep_scale'] == 'log' and attrs['sweep_min'] <= 0:
            raise serializers.ValidationError({'sweep_min': "Escala log exige sweep_min > 0"})

        politicas = [p.strip() for p in attrs['policies'].split(',') if p.strip()]
        invalidas = [p for p in politicas if p not in POLICY_CHOICES]
        if not politicas or invalidas:
            raise serializers.ValidationError({'policies': f"Políticas inválidas: {invalidas or 'lista vazia'}"})
        attrs['policies'] = politicas

        attrs['se_grid'] = _lista_floats(attrs['se_grid'], 'se_grid')
        if not attrs['se_grid'] or any(se <= 0 for se in attrs['se_grid']):
            raise serializers.ValidationError({'se_grid': "Eficiências espectrais devem ser positivas"})
        attrs['weak_fractions'] = _lista_floats(attrs['weak_fractions'], 'weak_fractions')
        if any(not 0 <= r < 0.5 for r in attrs['weak_fractions']):
            raise serializers.ValidationError({'weak_fractions': "ϱ deve estar em [0, 0.5)"})
        for campo in ('prior_t', 'prior_r'):
            pesos = _lista_floats(attrs[campo], campo)
            if any(p <= 0 for p in pesos):
                raise serializers.ValidationError({campo: "Pesos devem ser positivos"})
            attrs[campo] = pesos
        return attrs


# ============================================
# EXPERIMENTOS E EXECUÇÕES
# ============================================

class ExperimentoSerializer(serializers.ModelSerializer):
    total_execucoes = serializers.IntegerField(source='execucoes.count', read_only=True)

    class Meta:
        model = Experimento
        fields = ['id', 'nome', 'comando', 'config', 'seed', 'trials', 'total_execucoes', 'created_at', 'updated_at']
        read_only_fields = ['id', 'created_at', 'updated_at']

    def validate_config(self, value):
        """Valida o dicionário com o mesmo esquema dos arquivos de experimento"""
        if not isinstance(value, dict):
            raise serializers.ValidationError("config deve ser um objeto")
        desconhecidas = sorted(set(value) - set(ExperimentConfigSerializer().fields))
        if desconhecidas:
            raise serializers.ValidationError(f"Chaves desconhecidas: {', '.join(desconhecidas)}")
        config = ExperimentConfigSerializer(data=value)
        if not config.is_valid():
            raise serializers.ValidationError(config.errors)
        return value


class ExecucaoSerializer(serializers.ModelSerializer):
    experimento_nome = serializers.CharField(source='experimento.nome', read_only=True, default=None)

    class Meta:
        model = Execucao
        fields = [
            'id', 'experimento', 'experimento_nome', 'tipo', 'status',
            'resumo', 'arquivo_saida', 'duracao_s', 'mensagem', 'created_at'
        ]
        read_only_fields = fields


class SimulacaoRequestSerializer(serializers.Serializer):
    """Parâmetros opcionais do endpoint de simulação"""
    trials = serializers.IntegerField(required=False, min_value=1)
    seed = serializers.IntegerField(required=False, min_value=0)
    policy = serializers.ChoiceField(choices=list(POLICY_CHOICES), required=False)
    error_mode = serializers.ChoiceField(choices=list(ERROR_MODES), required=False)
