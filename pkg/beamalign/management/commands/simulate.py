# beamalign/management/commands/simulate.py
from django.conf import settings

from beamalign.management.base import ExperimentCommand
from beamalign.services.experimentos import format_dbm, write_csv
from beamalign.services.simulator import (
    INJECTED, analytic_vs_empirical, build_scenario, run_monte_carlo
)

STATS_HEADER = (
    'policy', 'error_mode', 'trials', 'power_W', 'power_ci_W', 'power_dBm',
    'spectral_efficiency', 'spectral_efficiency_ci', 'alignment_success_rate',
    'outage_rate', 'error_event_rate',
)


class Command(ExperimentCommand):
    help = 'Simulação Monte-Carlo de uma política'
    tipo = 'simulate'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--records', type=str, help='CSV com um registro por quadro')
        parser.add_argument(
            '--analitico', action='store_true',
            help='Compara DFS com erros injetados contra as expressões fechadas'
        )

    def run(self, cfg, params, opcoes, options):
        workers = settings.BEAMALIGN_WORKERS
        self.stdout.write(
            f'🎲 Simulando {cfg["trials"]} quadros: política {cfg["policy"]}, modo {cfg["error_mode"]}, seed {cfg["seed"]}...'
        )

        if options.get('analitico'):
            relatorio = analytic_vs_empirical(
                params, opcoes.p_fa if opcoes.p_fa is not None else params.pe,
                opcoes.p_md if opcoes.p_md is not None else params.pe,
                cfg['trials'], cfg['seed'], opcoes, workers,
            )
            for linha in relatorio.rows:
                estilo = self.style.WARNING if linha.flagged else self.style.SUCCESS
                self.stdout.write(estilo(
                    f'{linha.quantity}: analítico={linha.analytic:.9g} empírico={linha.empirical:.9g} z={linha.z_score:+.3f}'
                ))
            stats = relatorio.stats
            politica, modo = 'dfs', INJECTED
        else:
            cenario = build_scenario(params, cfg['policy'], cfg['error_mode'], opcoes)
            stats = run_monte_carlo(cenario, cfg['trials'], cfg['seed'], workers, options.get('records'))
            politica, modo = cfg['policy'], cfg['error_mode']

        linha = (
            politica, modo, stats.trials, repr(stats.mean_power), repr(stats.power_ci),
            format_dbm(stats.mean_power), repr(stats.mean_spectral_efficiency),
            repr(stats.spectral_efficiency_ci), repr(stats.alignment_success_rate),
            repr(stats.outage_rate), repr(stats.error_event_rate),
        )
        saida = write_csv(self.output_path(cfg), STATS_HEADER, [linha])
        self.archive_config(cfg, saida)
        self.stdout.write(self.style.SUCCESS(
            f'✅ P = {format_dbm(stats.mean_power)} dBm, SE = {stats.mean_spectral_efficiency:.4f} bps/Hz → {saida}'
        ))
        return stats.as_dict(), saida
