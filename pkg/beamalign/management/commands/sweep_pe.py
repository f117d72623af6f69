# beamalign/management/commands/sweep_pe.py
from beamalign.management.base import ExperimentCommand
from beamalign.services.experimentos import SWEEP_PE_HEADER, sweep_pe, sweep_pe_rows, write_csv
from beamalign.utils.config_file import sweep_grid


class Command(ExperimentCommand):
    help = 'Potência analítica vs p_e (p_fa = p_md = p_e) com vazão entregue fixa'
    tipo = 'sweep_pe'

    def run(self, cfg, params, opcoes, options):
        grade = sweep_grid(cfg)
        self.stdout.write(
            f'📈 Varrendo {len(grade)} valores de p_e para SE = {cfg["se_grid"]} bps/Hz...'
        )
        linhas = sweep_pe(params, grade, cfg['se_grid'])
        saida = write_csv(self.output_path(cfg), SWEEP_PE_HEADER, sweep_pe_rows(linhas))
        self.archive_config(cfg, saida)
        self.stdout.write(self.style.SUCCESS(f'✅ {len(linhas)} linhas gravadas em {saida}'))

        resumo = {}
        for se in cfg['se_grid']:
            pontos = [l for l in linhas if l['se'] == se]
            melhor = min(pontos, key=lambda l: l['power_W'])
            resumo[str(se)] = {'pe_otimo': melhor['pe'], 'power_W': melhor['power_W']}
        return resumo, saida
