# beamalign/management/commands/compare.py
from django.conf import settings

from beamalign.management.base import ExperimentCommand
from beamalign.services.experimentos import compare, compare_header, compare_rows, write_csv


class Command(ExperimentCommand):
    help = 'Eficiência espectral vs potência média para DFS e protocolos de referência'
    tipo = 'compare'

    def run(self, cfg, params, opcoes, options):
        politicas = cfg['policies']
        self.stdout.write(
            f'⚖️  Comparando {", ".join(politicas)} em {len(cfg["se_grid"])} pontos '
            f'({cfg["trials"]} quadros cada, modo {cfg["error_mode"]})...'
        )
        linhas = compare(
            params, opcoes, politicas, cfg['se_grid'], cfg['trials'], cfg['seed'],
            cfg['error_mode'], settings.BEAMALIGN_WORKERS,
        )
        saida = write_csv(self.output_path(cfg), compare_header(politicas), compare_rows(linhas, politicas))
        self.archive_config(cfg, saida)
        self.stdout.write(self.style.SUCCESS(f'✅ Comparação gravada em {saida}'))

        resumo = {
            str(l['spectral_efficiency']): {p: l['stats'][p].mean_power for p in politicas}
            for l in linhas
        }
        return resumo, saida
