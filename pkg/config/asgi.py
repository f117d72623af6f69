"""
Configuração ASGI do beamalign-api.

Expõe ``application`` para servidores ASGI (a API de planejamento e
simulação roda do mesmo jeito que no WSGI).
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')

application = get_asgi_application()
