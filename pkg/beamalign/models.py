from django.db import models
import uuid


# ============= EXPERIMENTOS =============
class Experimento(models.Model):
    """Configuração de experimento armazenada (mesmo esquema do arquivo key = value)"""

    COMANDOS = [
        ('plan', 'Plano'),
        ('sweep_pe', 'Varredura de p_e'),
        ('compare', 'Comparação de políticas'),
        ('multicluster', 'Multi-cluster'),
        ('simulate', 'Simulação'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    nome = models.CharField(max_length=200)
    comando = models.CharField(max_length=20, choices=COMANDOS, default='plan')
    config = models.JSONField(default=dict, blank=True)
    seed = models.BigIntegerField(default=0)
    trials = models.PositiveIntegerField(default=1000)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = 'experimentos'
        verbose_name = 'Experimento'
        verbose_name_plural = 'Experimentos'
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.nome} ({self.comando})"


class Execucao(models.Model):
    """Registro de uma execução (comando ou endpoint) de um experimento"""

    STATUS = [
        ('SUCESSO', 'Sucesso'),
        ('ERRO', 'Erro'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    experimento = models.ForeignKey(
        Experimento,
        on_delete=models.CASCADE,
        null=True,
        blank=True,
        related_name='execucoes'
    )
    tipo = models.CharField(max_length=20, choices=Experimento.COMANDOS)
    status = models.CharField(max_length=10, choices=STATUS, default='SUCESSO')
    resumo = models.JSONField(default=dict, blank=True)
    arquivo_saida = models.CharField(max_length=500, blank=True)
    duracao_s = models.FloatField(default=0.0)
    mensagem = models.TextField(blank=True)

    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'execucoes'
        verbose_name = 'Execução'
        verbose_name_plural = 'Execuções'
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['experimento', '-created_at'], name='execucoes_experim_5f1c2a_idx'),
            models.Index(fields=['tipo', 'status'], name='execucoes_tipo_8d3e41_idx'),
        ]

    def __str__(self):
        return f"{self.get_tipo_display()} - {self.get_status_display()} ({self.created_at:%Y-%m-%d %H:%M})"
