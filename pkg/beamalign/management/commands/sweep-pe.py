# beamalign/management/commands/sweep-pe.py
from beamalign.management.commands.sweep_pe import Command as SweepPeCommand


class Command(SweepPeCommand):
    """`manage.py sweep-pe`: mesmo experimento de `sweep_pe`"""
