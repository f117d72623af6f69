from django.contrib import admin
from .models import Experimento, Execucao


class ExecucaoInline(admin.TabularInline):
    model = Execucao
    extra = 0
    fields = ['tipo', 'status', 'duracao_s', 'arquivo_saida', 'created_at']
    readonly_fields = fields
    can_delete = False


@admin.register(Experimento)
class ExperimentoAdmin(admin.ModelAdmin):
    list_display = ['nome', 'comando', 'seed', 'trials', 'created_at']
    list_filter = ['comando']
    search_fields = ['nome']
    ordering = ['-created_at']
    inlines = [ExecucaoInline]


@admin.register(Execucao)
class ExecucaoAdmin(admin.ModelAdmin):
    list_display = ['tipo', 'status', 'experimento', 'duracao_s', 'created_at']
    list_filter = ['tipo', 'status', 'created_at']
    search_fields = ['experimento__nome', 'mensagem']
    readonly_fields = ['created_at']
    ordering = ['-created_at']
