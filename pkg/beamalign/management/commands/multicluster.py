# beamalign/management/commands/multicluster.py
from django.conf import settings

from beamalign.management.base import ExperimentCommand
from beamalign.services.experimentos import (
    DEFAULT_MULTICLUSTER_POLICIES, MULTICLUSTER_HEADER, multicluster, multicluster_rows, write_csv
)


class Command(ExperimentCommand):
    help = 'Degradação com canal de dois clusters (K = 2) em função de ϱ'
    tipo = 'multicluster'

    def run(self, cfg, params, opcoes, options):
        politicas = [p for p in cfg['policies'] if p in DEFAULT_MULTICLUSTER_POLICIES] or list(DEFAULT_MULTICLUSTER_POLICIES)
        se = cfg['spectral_efficiency'] if cfg.get('spectral_efficiency') is not None else cfg['se_grid'][-1]
        self.stdout.write(
            f'📡 Multi-cluster: ϱ = {cfg["weak_fractions"]}, SE = {se} bps/Hz, políticas {", ".join(politicas)}...'
        )
        linhas = multicluster(
            params, opcoes, cfg['weak_fractions'], se, politicas,
            cfg['trials'], cfg['seed'], settings.BEAMALIGN_WORKERS,
        )
        saida = write_csv(self.output_path(cfg), MULTICLUSTER_HEADER, multicluster_rows(linhas))
        self.archive_config(cfg, saida)
        self.stdout.write(self.style.SUCCESS(f'✅ Resultados gravados em {saida}'))

        resumo = {
            f"{l['weak_fraction']}/{l['policy']}": {
                'power_W': l['stats'].mean_power,
                'spectral_efficiency': l['stats'].mean_spectral_efficiency,
                'rmin_bps': l['rmin_bps'],
            }
            for l in linhas
        }
        return resumo, saida
