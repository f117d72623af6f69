# utils/config_file.py
"""
Leitura dos arquivos de experimento (texto `key = value` com comentários #).

O parser é o RepositoryEnv do python-decouple, o mesmo que o settings usa
para o .env; a validação e os padrões vêm do ExperimentConfigSerializer.
"""
import logging
import math
from pathlib import Path

from decouple import RepositoryEnv

from ..exceptions import ConfigError
from ..serializers import ExperimentConfigSerializer
from ..services.phy import SPEED_OF_LIGHT, SystemParams, dbm_to_watts, path_loss_value
from ..services.simulator import SimulationOptions
from .angleset import AngleSet, PiecewisePrior

logger = logging.getLogger(__name__)

NULOS = {'', 'none', 'null'}
CHAVES_NULAVEIS = {'sigma_e2', 'spectral_efficiency', 'p_fa', 'p_md', 'phi_s_dbm', 'bisection_cmp_error'}


def known_keys():
    return set(ExperimentConfigSerializer().fields)


def read_experiment_file(caminho):
    """Dicionário cru {chave: texto} do arquivo; chaves desconhecidas são rejeitadas"""
    caminho = Path(caminho)
    if not caminho.is_file():
        raise ConfigError(f"Arquivo de experimento não encontrado: {caminho}")
    dados = dict(RepositoryEnv(str(caminho)).data)
    desconhecidas = sorted(set(dados) - known_keys())
    if desconhecidas:
        raise ConfigError(f"Chaves desconhecidas em {caminho}: {', '.join(desconhecidas)}")
    logger.debug("Arquivo %s: %d chaves", caminho, len(dados))
    return dados


def validate_experiment(dados):
    """Aplica padrões, tipos e faixas; devolve o dicionário validado"""
    desconhecidas = sorted(set(dados) - known_keys())
    if desconhecidas:
        raise ConfigError(f"Chaves desconhecidas: {', '.join(desconhecidas)}")
    limpos = {}
    for chave, valor in dados.items():
        if chave in CHAVES_NULAVEIS and isinstance(valor, str) and valor.strip().lower() in NULOS:
            valor = None
        limpos[chave] = valor
    serializer = ExperimentConfigSerializer(data=limpos)
    if not serializer.is_valid():
        raise ConfigError("Configuração de experimento inválida", errors=serializer.errors)
    return dict(serializer.validated_data)


def load_experiment(caminho=None, overrides=None):
    """
    Configuração validada a partir de arquivo (opcional) e overrides.

    Overrides com valor None são ignorados (flags de CLI não informadas).
    """
    dados = read_experiment_file(caminho) if caminho else {}
    for chave, valor in (overrides or {}).items():
        if valor is not None:
            dados[chave] = valor
    return validate_experiment(dados)


def build_params(cfg, **alteracoes):
    """SystemParams a partir da configuração validada"""
    rmin = cfg['rmin_bps']
    if cfg.get('spectral_efficiency') is not None:
        rmin = cfg['spectral_efficiency'] * cfg['bandwidth_hz']
    phi_s = cfg.get('phi_s_dbm')
    wavelength = SPEED_OF_LIGHT / cfg['carrier_frequency_hz']
    gamma_hat, sigma_e2 = cfg['gamma_hat'], cfg.get('sigma_e2')
    if cfg.get('channel') == 'los':
        gamma_hat = gamma_hat or 1.0 / path_loss_value(wavelength, cfg['distance_m'], cfg['path_loss_exponent'])
        sigma_e2 = 0.0
    valores = dict(
        wavelength_m=wavelength,
        distance_m=cfg['distance_m'],
        path_loss_exponent=cfg['path_loss_exponent'],
        noise_psd=dbm_to_watts(cfg['noise_psd_dbm_hz']),
        bandwidth=cfg['bandwidth_hz'],
        frame=cfg['frame_s'],
        slots=cfg['slots'],
        beacon=cfg['beacon_s'],
        feedback=cfg['feedback_s'],
        epsilon=cfg['epsilon'],
        rmin=rmin,
        pe=cfg['pe'],
        sigma_e2_override=sigma_e2,
        gamma_hat=gamma_hat,
        phi_s_override=dbm_to_watts(phi_s) if phi_s is not None else None,
        phi_s_reference_pe=cfg['phi_s_reference_pe'],
        symbol_energy=cfg['symbol_energy'],
        symbol_time=cfg['symbol_time_s'],
        l_max=cfg['l_max'],
        ut0=AngleSet.interval(cfg['ut0_lo'], cfg['ut0_hi']),
        ur0=AngleSet.interval(cfg['ur0_lo'], cfg['ur0_hi']),
        antennas_bs=cfg['antennas_bs'],
        antennas_ue=cfg['antennas_ue'],
        clusters=int(cfg['clusters']),
        weak_cluster_fraction=cfg['weak_cluster_fraction'],
    )
    valores.update(alteracoes)
    try:
        return SystemParams(**valores)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_prior(pesos, suporte):
    """Priori constante por partes; lista vazia (ou pesos iguais) = uniforme"""
    if not pesos:
        return None
    if max(pesos) <= min(pesos) * (1 + 1e-12):
        return PiecewisePrior.uniform(suporte)
    return PiecewisePrior.from_weights(suporte, pesos)


def build_options(cfg, params):
    return SimulationOptions(
        p_fa=cfg.get('p_fa'),
        p_md=cfg.get('p_md'),
        p_cmp=cfg.get('bisection_cmp_error'),
        beta_start=cfg['beta_start'],
        nb_bs=cfg['nb_bs'],
        nb_ue=cfg['nb_ue'],
        bisection_levels=cfg['bisection_levels'],
        prior_t=build_prior(cfg['prior_t'], params.ut0),
        prior_r=build_prior(cfg['prior_r'], params.ur0),
    )


def sweep_grid(cfg):
    """Pontos da varredura (log ou linear) entre sweep_min e sweep_max"""
    n = cfg['sweep_points']
    lo, hi = cfg['sweep_min'], cfg['sweep_max']
    if n == 1:
        return [lo]
    if cfg['sweep_scale'] == 'log':
        a, b = math.log10(lo), math.log10(hi)
        return [10 ** (a + (b - a) * i / (n - 1)) for i in range(n)]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def render_experiment(cfg):
    """Texto key = value reprodutível da configuração (arquivado junto às saídas)"""
    linhas = []
    for chave in sorted(cfg):
        valor = cfg[chave]
        if isinstance(valor, (list, tuple)):
            valor = ','.join(repr(v) if isinstance(v, float) else str(v) for v in valor)
        elif valor is None:
            valor = 'none'
        elif isinstance(valor, float):
            valor = repr(valor)
        linhas.append(f"{chave} = {valor}")
    return '\n'.join(linhas) + '\n'
