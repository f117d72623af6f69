# services/outage.py
"""
CCDF do ganho de canal, otimização q*/ϑ do feixe de dados e as
densidades de energia ψ_d e φ_d da fase de comunicação.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from ..exceptions import DomainError, InfeasibleError
from .detection import marcum_q1
from .phy import beamforming_factor

logger = logging.getLogger(__name__)

INV_RTOL = 1e-10
Q_GRID_STEP = 1e-4
Q_GRID_MAX_POINTS = 400


def ccdf_gamma(x, gamma_hat, sigma_e2):
    """F̄_γ(x|γ̂) = P(γ >= x | γ̂) = Q1(√(2γ̂/σ_e²), √(2x/σ_e²))"""
    if x < 0:
        raise DomainError("x deve ser não negativo")
    if x == 0:
        return 1.0
    if sigma_e2 == 0:
        # CSI perfeito: degrau em γ̂
        return 1.0 if x <= gamma_hat else 0.0
    if gamma_hat == 0:
        return math.exp(-x / sigma_e2)
    return marcum_q1(math.sqrt(2.0 * gamma_hat / sigma_e2), math.sqrt(2.0 * x / sigma_e2))


def inv_ccdf_gamma(q, gamma_hat, sigma_e2):
    """F̄⁻¹(q|γ̂): maior x com F̄(x) >= q"""
    if not 0 < q <= 1:
        raise DomainError(f"q fora de (0, 1]: {q}")
    if sigma_e2 == 0:
        return gamma_hat
    if q == 1:
        return 0.0
    if gamma_hat == 0:
        return -sigma_e2 * math.log(q)

    def excesso(x):
        return ccdf_gamma(x, gamma_hat, sigma_e2) - q

    alto = gamma_hat + sigma_e2
    while excesso(alto) > 0:
        alto *= 2.0
        logger.debug("Expandindo colchete de F̄⁻¹ para %g", alto)
    return optimize.brentq(excesso, 0.0, alto, xtol=1e-300, rtol=INV_RTOL)


def _objetivo(q, gamma_hat, sigma_e2):
    return q * inv_ccdf_gamma(q, gamma_hat, sigma_e2)


def q_star_and_theta(epsilon, gamma_hat, sigma_e2):
    """
    q* = argmax_{q∈[1-ε, 1]} q F̄⁻¹(q|γ̂) e ϑ = (1-ε)/q*.

    Grade de resolução 1e-4 (no máximo Q_GRID_MAX_POINTS pontos) seguida
    de refinamento limitado em torno do melhor ponto; empates vão para o
    menor q.
    """
    if not 0 < epsilon < 1:
        raise DomainError("epsilon deve estar em (0, 1)")
    inicio = 1.0 - epsilon
    pontos = min(Q_GRID_MAX_POINTS, int(math.ceil(epsilon / Q_GRID_STEP))) + 1
    grade = np.linspace(inicio, 1.0, pontos)
    valores = np.array([_objetivo(q, gamma_hat, sigma_e2) for q in grade])
    melhor = int(np.argmax(valores))
    q_star, valor = float(grade[melhor]), float(valores[melhor])

    lo = grade[max(melhor - 1, 0)]
    hi = grade[min(melhor + 1, pontos - 1)]
    if hi > lo:
        refinado = optimize.minimize_scalar(
            lambda q: -_objetivo(q, gamma_hat, sigma_e2),
            bounds=(lo, hi),
            method='bounded',
            options={'xatol': 1e-12},
        )
        if refinado.success and -refinado.fun > valor:
            q_star, valor = float(refinado.x), float(-refinado.fun)
    if valor <= 0:
        raise InfeasibleError("Canal sem ganho: q F̄⁻¹(q) é nulo em [1-ε, 1]")
    return q_star, inicio / q_star


def psi_d(rate, params):
    """ψ_d(R) = (2π)⁻² N0 W_tot T (2^{R/W_tot} - 1)"""
    if rate < 0:
        raise DomainError("Taxa negativa")
    try:
        fator = math.expm1(rate / params.bandwidth * math.log(2.0))
    except OverflowError as exc:
        raise InfeasibleError(f"Taxa {rate:.3e} bit/s não representável") from exc
    return params.noise_power * params.slot * fator / (2.0 * math.pi) ** 2


@dataclass(frozen=True)
class OutageDesign:
    epsilon: float
    gamma_hat: float
    sigma_e2: float
    q_star: float
    theta: float
    inv_at_q_star: float

    @property
    def coefficient(self):
        """(1-ε) / (q* F̄⁻¹(q*)): φ_d = coeficiente·ψ_d"""
        return (1.0 - self.epsilon) / (self.q_star * self.inv_at_q_star)

    def phi_d(self, rate, params):
        return psi_d(rate, params) * self.coefficient


@lru_cache(maxsize=256)
def _design_cache(epsilon, gamma_hat, sigma_e2):
    q_star, theta = q_star_and_theta(epsilon, gamma_hat, sigma_e2)
    return OutageDesign(
        epsilon=epsilon,
        gamma_hat=gamma_hat,
        sigma_e2=sigma_e2,
        q_star=q_star,
        theta=theta,
        inv_at_q_star=inv_ccdf_gamma(q_star, gamma_hat, sigma_e2),
    )


def design_outage(params):
    return _design_cache(params.epsilon, params.data_gamma_hat, params.data_sigma_e2)


def phi_d(rate, params, design=None):
    """φ_d(R, ε) = ψ_d(R)(1-ε) / (q* F̄⁻¹(q*|γ̂))"""
    design = design or design_outage(params)
    return design.phi_d(rate, params)


def _inverso_alinhado(align_prob, params):
    if align_prob < 1.0 - params.epsilon - 1e-12:
        raise InfeasibleError(
            f"Probabilidade de alinhamento {align_prob:.6g} abaixo de 1-ε={1 - params.epsilon:.6g}"
        )
    q = min(1.0, (1.0 - params.epsilon) / align_prob)
    return inv_ccdf_gamma(q, params.data_gamma_hat, params.data_sigma_e2)


def outage_capacity(power, beam_t_measure, beam_r_measure, align_prob, params):
    """C_ε = W log2(1 + ν F̄⁻¹((1-ε)/P(θ∈B|H)))"""
    x = _inverso_alinhado(align_prob, params)
    if power <= 0 or x <= 0:
        return 0.0
    nu = beamforming_factor(power, beam_t_measure, beam_r_measure, params)
    return params.bandwidth * math.log2(1.0 + nu * x)


def data_energy(rate, beam_measure, align_prob, params):
    """E = ψ_d(R)|B| / F̄⁻¹((1-ε)/P(θ∈B|U)), energia de um slot de dados"""
    if rate == 0:
        return 0.0
    x = _inverso_alinhado(align_prob, params)
    if x <= 0:
        raise InfeasibleError("Feixe de dados sem margem de outage (F̄⁻¹ = 0)")
    return psi_d(rate, params) * beam_measure / x
