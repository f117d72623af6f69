# Generated by Django 5.2.7 on 2026-10-17 12:00

import django.db.models.deletion
import uuid
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Experimento',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('nome', models.CharField(max_length=200)),
                ('comando', models.CharField(choices=[('plan', 'Plano'), ('sweep_pe', 'Varredura de p_e'), ('compare', 'Comparação de políticas'), ('multicluster', 'Multi-cluster'), ('simulate', 'Simulação')], default='plan', max_length=20)),
                ('config', models.JSONField(blank=True, default=dict)),
                ('seed', models.BigIntegerField(default=0)),
                ('trials', models.PositiveIntegerField(default=1000)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'verbose_name': 'Experimento',
                'verbose_name_plural': 'Experimentos',
                'db_table': 'experimentos',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='Execucao',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('tipo', models.CharField(choices=[('plan', 'Plano'), ('sweep_pe', 'Varredura de p_e'), ('compare', 'Comparação de políticas'), ('multicluster', 'Multi-cluster'), ('simulate', 'Simulação')], max_length=20)),
                ('status', models.CharField(choices=[('SUCESSO', 'Sucesso'), ('ERRO', 'Erro')], default='SUCESSO', max_length=10)),
                ('resumo', models.JSONField(blank=True, default=dict)),
                ('arquivo_saida', models.CharField(blank=True, max_length=500)),
                ('duracao_s', models.FloatField(default=0.0)),
                ('mensagem', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('experimento', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.CASCADE, related_name='execucoes', to='beamalign.experimento')),
            ],
            options={
                'verbose_name': 'Execução',
                'verbose_name_plural': 'Execuções',
                'db_table': 'execucoes',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['experimento', '-created_at'], name='execucoes_experim_5f1c2a_idx'), models.Index(fields=['tipo', 'status'], name='execucoes_tipo_8d3e41_idx')],
            },
        ),
    ]
