"""
Hierarquia de erros do hardyheat
Mensagens em PT-BR; contexto estruturado vai em `contexto` para serialização
"""
from typing import Any, Dict


class HardyHeatError(Exception):
    """Erro base de todo o pacote"""

    codigo = "HARDYHEAT_ERROR"

    def __init__(self, mensagem: str, **contexto: Any):
        super().__init__(mensagem)
        self.mensagem = mensagem
        self.contexto: Dict[str, Any] = contexto

    def to_dict(self) -> Dict[str, Any]:
        return {"codigo": self.codigo, "mensagem": self.mensagem, "contexto": self.contexto}


# Geometria
class NoSuchStratum(HardyHeatError):
    codigo = "NO_SUCH_STRATUM"


class OutsideDomain(HardyHeatError):
    codigo = "OUTSIDE_DOMAIN"


class RadiusTooLarge(HardyHeatError):
    codigo = "RADIUS_TOO_LARGE"


class NonIntegrableWeight(HardyHeatError):
    codigo = "NON_INTEGRABLE_WEIGHT"


# Potenciais
class HardyConstantExceeded(HardyHeatError):
    codigo = "HARDY_CONSTANT_EXCEEDED"


class ParameterOutOfRange(HardyHeatError):
    codigo = "PARAMETER_OUT_OF_RANGE"


class OverlappingSingularities(HardyHeatError):
    codigo = "OVERLAPPING_SINGULARITIES"


class IncompatibleCoefficients(HardyHeatError):
    codigo = "INCOMPATIBLE_COEFFICIENTS"


class AsymmetricCoefficient(HardyHeatError):
    codigo = "ASYMMETRIC_COEFFICIENT"


# Discretização
class BudgetExceeded(HardyHeatError):
    codigo = "BUDGET_EXCEEDED"


class QuadratureBreakdown(HardyHeatError):
    codigo = "QUADRATURE_BREAKDOWN"


# Espectral
class NotBoundedBelow(HardyHeatError):
    codigo = "NOT_BOUNDED_BELOW"


class WindowTooNarrow(HardyHeatError):
    codigo = "WINDOW_TOO_NARROW"


class DivisionUnderflow(HardyHeatError):
    codigo = "DIVISION_UNDERFLOW"


# Calor
class FactorizationFailed(HardyHeatError):
    codigo = "FACTORIZATION_FAILED"


class NonFiniteState(HardyHeatError):
    codigo = "NON_FINITE_STATE"


class TailNotConverged(HardyHeatError):
    codigo = "TAIL_NOT_CONVERGED"


class EmptyGrid(HardyHeatError):
    codigo = "EMPTY_GRID"


class UnboundedRatio(HardyHeatError):
    codigo = "UNBOUNDED_RATIO"


class NonPositiveSolution(HardyHeatError):
    codigo = "NON_POSITIVE_SOLUTION"


# Desigualdades
class NonConvergedMinimizer(HardyHeatError):
    codigo = "NON_CONVERGED_MINIMIZER"


class NonFiniteEntropy(HardyHeatError):
    codigo = "NON_FINITE_ENTROPY"


class ZeroDenominator(HardyHeatError):
    codigo = "ZERO_DENOMINATOR"


class ExcludedExponent(HardyHeatError):
    codigo = "EXCLUDED_EXPONENT"


# CLI
class ConfigInvalid(HardyHeatError):
    codigo = "CONFIG_INVALID"


class SchemaMismatch(HardyHeatError):
    codigo = "SCHEMA_MISMATCH"


class TaskFailed(HardyHeatError):
    """Erro de uma tarefa, com o id da tarefa no contexto"""
    codigo = "TASK_FAILED"
