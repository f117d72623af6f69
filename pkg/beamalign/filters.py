"""
Filtros customizados para APIs
"""
from django_filters import rest_framework as filters
from .models import Execucao


class ExecucaoFilter(filters.FilterSet):
    """Filtro customizado para Execuções"""

    # Filtros por período
    criado_inicio = filters.IsoDateTimeFilter(field_name='created_at', lookup_expr='gte')
    criado_fim = filters.IsoDateTimeFilter(field_name='created_at', lookup_expr='lte')

    # Filtro pelo nome do experimento
    experimento_nome = filters.CharFilter(field_name='experimento__nome', lookup_expr='icontains')

    # Execuções mais lentas que N segundos
    duracao_min = filters.NumberFilter(field_name='duracao_s', lookup_expr='gte')

    class Meta:
        model = Execucao
        fields = {
            'experimento': ['exact'],
            'tipo': ['exact'],
            'status': ['exact'],
        }
