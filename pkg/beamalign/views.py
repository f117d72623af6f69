import time

from django.conf import settings
from django_filters.rest_framework import DjangoFilterBackend
from rest_framework import filters, status, viewsets
from rest_framework.decorators import action
from rest_framework.permissions import IsAuthenticated
from rest_framework.response import Response

from .exceptions import BeamAlignError, ConfigError
from .filters import ExecucaoFilter
from .models import Execucao, Experimento
from .serializers import ExecucaoSerializer, ExperimentoSerializer, SimulacaoRequestSerializer
from .services.experimentos import plan_report
from .services.simulator import build_scenario, run_monte_carlo
from .utils.config_file import build_options, build_params, validate_experiment


def _erro(exc):
    """Resposta 400 padronizada para erros de domínio/configuração"""
    corpo = {'success': False, 'message': str(exc)}
    if isinstance(exc, ConfigError) and exc.errors:
        corpo['errors'] = exc.errors
    return Response(corpo, status=status.HTTP_400_BAD_REQUEST)


# ============================================
# VIEWSETS - EXPERIMENTOS
# ============================================

class ExperimentoViewSet(viewsets.ModelViewSet):
    """CRUD de Experimentos + execução de plano e simulação"""
    queryset = Experimento.objects.all()
    serializer_class = ExperimentoSerializer
    permission_classes = [IsAuthenticated]
    filter_backends = [DjangoFilterBackend, filters.SearchFilter, filters.OrderingFilter]
    filterset_fields = ['comando']
    search_fields = ['nome']
    ordering_fields = ['created_at', 'nome']

    def _registrar(self, experimento, tipo, resumo, inicio, status_execucao='SUCESSO', mensagem=''):
        return Execucao.objects.create(
            experimento=experimento,
            tipo=tipo,
            status=status_execucao,
            resumo=resumo,
            duracao_s=time.monotonic() - inicio,
            mensagem=mensagem,
        )

    @action(detail=True, methods=['post'])
    def planejar(self, request, pk=None):
        """Plano ótimo (L*, ρ_k, ϑ, P̄_u) para a configuração do experimento"""
        experimento = self.get_object()
        inicio = time.monotonic()
        try:
            params = build_params(validate_experiment(experimento.config))
            relatorio = plan_report(params)
        except BeamAlignError as exc:
            self._registrar(experimento, 'plan', {}, inicio, 'ERRO', str(exc))
            return _erro(exc)

        relatorio.pop('schedule')
        execucao = self._registrar(experimento, 'plan', relatorio, inicio)
        return Response({'success': True, 'execucao': str(execucao.id), 'plano': relatorio})

    @action(detail=True, methods=['post'])
    def simular(self, request, pk=None):
        """Monte-Carlo da política configurada (trials limitados por BEAMALIGN_API_MAX_TRIALS)"""
        experimento = self.get_object()
        pedido = SimulacaoRequestSerializer(data=request.data)
        if not pedido.is_valid():
            return Response({'success': False, 'errors': pedido.errors}, status=status.HTTP_400_BAD_REQUEST)

        trials = pedido.validated_data.get('trials', experimento.trials)
        limite = settings.BEAMALIGN_API_MAX_TRIALS
        if trials > limite:
            return Response({
                'success': False,
                'message': f'Máximo de {limite} quadros por requisição'
            }, status=status.HTTP_400_BAD_REQUEST)

        inicio = time.monotonic()
        try:
            cfg = validate_experiment(experimento.config)
            params = build_params(cfg)
            cenario = build_scenario(
                params,
                pedido.validated_data.get('policy', cfg['policy']),
                pedido.validated_data.get('error_mode', cfg['error_mode']),
                build_options(cfg, params),
            )
            stats = run_monte_carlo(cenario, trials, pedido.validated_data.get('seed', experimento.seed))
        except BeamAlignError as exc:
            self._registrar(experimento, 'simulate', {}, inicio, 'ERRO', str(exc))
            return _erro(exc)

        resumo = stats.as_dict()
        execucao = self._registrar(experimento, 'simulate', resumo, inicio)
        return Response({'success': True, 'execucao': str(execucao.id), 'estatisticas': resumo})


class ExecucaoViewSet(viewsets.ReadOnlyModelViewSet):
    """Histórico de execuções (somente leitura)"""
    queryset = Execucao.objects.select_related('experimento').all()
    serializer_class = ExecucaoSerializer
    permission_classes = [IsAuthenticated]
    filter_backends = [DjangoFilterBackend, filters.OrderingFilter]
    filterset_class = ExecucaoFilter
    ordering_fields = ['created_at', 'duracao_s']
