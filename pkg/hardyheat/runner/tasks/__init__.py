"""Handlers por tarefa; cada um expõe processar(state) -> código"""
from hardyheat.runner.tasks.appendix import AppendixTask
from hardyheat.runner.tasks.exponents import ExponentsTask
from hardyheat.runner.tasks.harnack import HarnackTask
from hardyheat.runner.tasks.heatkernel import HeatKernelTask
from hardyheat.runner.tasks.logsobolev import LogSobolevTask
from hardyheat.runner.tasks.moser import MoserTask
from hardyheat.runner.tasks.poincare import PoincareTask
from hardyheat.runner.tasks.sobolev import SobolevTask
from hardyheat.runner.tasks.spectrum import SpectrumTask
from hardyheat.runner.tasks.volume import VolumeTask

__all__ = [
    "AppendixTask",
    "ExponentsTask",
    "HarnackTask",
    "HeatKernelTask",
    "LogSobolevTask",
    "MoserTask",
    "PoincareTask",
    "SobolevTask",
    "SpectrumTask",
    "VolumeTask",
]
