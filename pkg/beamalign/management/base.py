# beamalign/management/base.py
"""
Base dos comandos de experimento: flags comuns, carga da configuração,
conversão de erros de domínio em CommandError e registro opcional da
execução no banco.
"""
import logging
import time
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ..exceptions import BeamAlignError, ConfigError
from ..models import Execucao
from ..utils.config_file import build_options, build_params, load_experiment, render_experiment

logger = logging.getLogger(__name__)


class ExperimentCommand(BaseCommand):
    """Comando que roda a partir de um arquivo key = value"""

    tipo = None
    extensao = '.csv'

    def add_arguments(self, parser):
        parser.add_argument('--config', type=str, help='Arquivo de experimento (key = value)')
        parser.add_argument('--seed', type=int, help='Semente (sobrescreve o arquivo)')
        parser.add_argument('--trials', type=int, help='Número de quadros (sobrescreve o arquivo)')
        parser.add_argument('--out', type=str, help='Caminho de saída (sobrescreve o arquivo)')
        parser.add_argument('--registrar', action='store_true', help='Registra a execução no banco')

    def handle(self, *args, **options):
        inicio = time.monotonic()
        try:
            cfg = load_experiment(options.get('config'), {
                'seed': options.get('seed'),
                'trials': options.get('trials'),
                'output': options.get('out'),
            })
        except ConfigError as exc:
            detalhes = f": {exc.errors}" if exc.errors else ''
            raise CommandError(f"{exc}{detalhes}") from exc

        try:
            params = build_params(cfg)
            resumo, saida = self.run(cfg, params, build_options(cfg, params), options)
        except BeamAlignError as exc:
            self.stderr.write(self.style.ERROR(f'❌ {exc}'))
            if options.get('registrar'):
                self._registrar(cfg, 'ERRO', {}, '', inicio, str(exc))
            raise CommandError(str(exc)) from exc

        if options.get('registrar'):
            self._registrar(cfg, 'SUCESSO', resumo, str(saida or ''), inicio)
        return None

    def run(self, cfg, params, opcoes, options):
        """Executa o experimento; devolve (resumo JSON, caminho de saída)"""
        raise NotImplementedError

    def output_path(self, cfg):
        if cfg.get('output'):
            return Path(cfg['output'])
        return Path(settings.BEAMALIGN_OUTPUT_DIR) / f"{self.tipo}{self.extensao}"

    def archive_config(self, cfg, saida):
        """Grava a configuração efetiva ao lado da saída"""
        arquivo = Path(saida).with_suffix('.conf')
        arquivo.parent.mkdir(parents=True, exist_ok=True)
        arquivo.write_text(render_experiment(cfg))
        logger.info("Configuração arquivada em %s", arquivo)
        return arquivo

    def _registrar(self, cfg, status, resumo, saida, inicio, mensagem=''):
        execucao = Execucao.objects.create(
            tipo=self.tipo,
            status=status,
            resumo=resumo,
            arquivo_saida=saida,
            duracao_s=time.monotonic() - inicio,
            mensagem=mensagem,
        )
        self.stdout.write(f'🗂️  Execução registrada: {execucao.id}')
        return execucao
