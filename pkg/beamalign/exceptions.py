# beamalign/exceptions.py
"""Erros de domínio do planejador e do simulador."""


class BeamAlignError(Exception):
    """Base de todos os erros do beamalign"""


class DomainError(BeamAlignError, ValueError):
    """Argumento fora do domínio da operação"""


class InfeasibleError(BeamAlignError):
    """Não existe projeto viável (p_e alto demais, taxa não representável, ...)"""


class ProtocolError(BeamAlignError):
    """Feedback incoerente com a ação ou feixe fora do suporte"""


class ConfigError(BeamAlignError):
    """Arquivo/corpo de configuração inválido"""

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors or {}
