# beamalign/management/commands/plan.py
from pathlib import Path

from beamalign.management.base import ExperimentCommand
from beamalign.services.experimentos import format_plan, plan_report


class Command(ExperimentCommand):
    help = 'Calcula o plano ótimo de alinhamento (L*, ρ_k, ϑ, R_dc, P̄_u)'
    tipo = 'plan'
    extensao = '.txt'

    def run(self, cfg, params, opcoes, options):
        relatorio = plan_report(params)
        texto = format_plan(relatorio)
        self.stdout.write(texto, ending='')

        saida = None
        if cfg.get('output'):
            saida = Path(cfg['output'])
            saida.parent.mkdir(parents=True, exist_ok=True)
            saida.write_text(texto)
            self.archive_config(cfg, saida)
            self.stdout.write(self.style.SUCCESS(f'✅ Plano gravado em {saida}'))

        if relatorio['rho_check'] != 'PASS':
            self.stdout.write(self.style.WARNING('⚠️  Sequência ρ fora de (0, 1/2) ou não crescente'))

        resumo = {
            'L_star': relatorio['L_star'],
            'L_min': relatorio['L_min'],
            'rho': relatorio['rho'],
            'theta': relatorio['theta'],
            'data_rate_bps': relatorio['data_rate_bps'],
            'v0': relatorio['v0'],
            'P_bar_u_W': relatorio['P_bar_u_W'],
        }
        return resumo, saida
