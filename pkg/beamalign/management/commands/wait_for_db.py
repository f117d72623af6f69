# beamalign/management/commands/wait_for_db.py
import time

from django.core.management.base import BaseCommand, CommandError
from django.db import connections
from django.db.utils import OperationalError


class Command(BaseCommand):
    """Bloqueia até o banco de registros de execução aceitar conexões"""
    help = 'Aguarda o banco de dados estar disponível'

    def add_arguments(self, parser):
        parser.add_argument('--tentativas', type=int, default=30)
        parser.add_argument('--intervalo', type=float, default=1.0, help='segundos entre tentativas')

    def handle(self, *args, **options):
        tentativas = options['tentativas']
        self.stdout.write('🔄 Aguardando banco de dados...')
        for tentativa in range(1, tentativas + 1):
            try:
                connections['default'].ensure_connection()
            except OperationalError:
                self.stdout.write(f'⏳ Banco indisponível ({tentativa}/{tentativas})')
                time.sleep(options['intervalo'])
                continue
            self.stdout.write(self.style.SUCCESS('✅ Banco de dados disponível!'))
            return
        raise CommandError('Não foi possível conectar ao banco de dados')
