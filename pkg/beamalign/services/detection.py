# services/detection.py
"""
Projeto do detector de beacons.

Limiar τ_th, curva de misdetecção via Q de Marcum de primeira ordem,
fator mínimo de beamforming ν* e a densidade de energia φ_s exigida por
slot de alinhamento.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from ..exceptions import DomainError, InfeasibleError

logger = logging.getLogger(__name__)

SERIES_RTOL = 1e-14
SERIES_MAX_TERMS = 4000
SERIES_GUARD_AB = 30.0
SOLVER_TOL = 1e-9


def threshold(pe):
    """τ_th = -ln(p_e): p_fa(τ_th) = p_e com igualdade"""
    if not 0 < pe < 1:
        raise DomainError(f"p_e fora de (0, 1): {pe}")
    return -math.log(pe)


def false_alarm(tau):
    """p_fa(τ) = exp(-τ)"""
    return math.exp(-tau)


def _soma_serie(razao, x, inicio):
    """Σ_{k>=inicio} razao^k · ive(k, x), truncada em erro relativo SERIES_RTOL"""
    total = 0.0
    k = inicio
    bloco = 64
    while k < SERIES_MAX_TERMS:
        ordens = np.arange(k, k + bloco)
        termos = special.ive(ordens, x) * np.power(razao, ordens)
        for termo in termos:
            total += termo
            if termo <= SERIES_RTOL * total or termo == 0.0:
                return total
        k += bloco
    logger.debug("Série de Marcum não convergiu em %d termos (x=%g)", SERIES_MAX_TERMS, x)
    return total


def marcum_q1_series(a, b):
    """
    Par (Q1(a,b), 1 - Q1(a,b)) pela série de Bessel.

    Para a < b soma Σ (a/b)^k I_k(ab); para a >= b soma o complemento, o
    que mantém precisão relativa na cauda pequena em ambos os regimes.
    """
    if a < 0 or b < 0:
        raise DomainError("Argumentos do Q de Marcum devem ser não negativos")
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return math.exp(-b * b / 2.0), -math.expm1(-b * b / 2.0)
    escala = math.exp(-(a - b) ** 2 / 2.0)
    if a < b:
        q = escala * _soma_serie(a / b, a * b, 0)
        return q, 1.0 - q
    comp = escala * _soma_serie(b / a, a * b, 1)
    return 1.0 - comp, comp


def marcum_q1_integral(a, b):
    """Q1(a,b) = ∫_b^∞ x exp(-(x²+a²)/2) I0(ax) dx por quadratura"""
    if a < 0 or b < 0:
        raise DomainError("Argumentos do Q de Marcum devem ser não negativos")

    def densidade(x):
        return x * math.exp(-(x - a) ** 2 / 2.0) * special.i0e(a * x)

    if b >= a:
        valor, _ = integrate.quad(densidade, b, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
        return min(max(valor, 0.0), 1.0), 1.0 - min(max(valor, 0.0), 1.0)
    comp, _ = integrate.quad(densidade, 0.0, b, epsabs=1e-14, epsrel=1e-12, limit=400)
    comp = min(max(comp, 0.0), 1.0)
    return 1.0 - comp, comp


def _marcum_par(a, b):
    if a * b > SERIES_GUARD_AB:
        return marcum_q1_integral(a, b)
    return marcum_q1_series(a, b)


def marcum_q1(a, b):
    """Q de Marcum de primeira ordem"""
    return _marcum_par(a, b)[0]


def p_md(nu, tau, gamma_hat, sigma_e2, s_energy=1.0):
    """
    Probabilidade de misdetecção sob H1:
    1 - Q1(√(2γ̂ν‖s‖²/(1+ν‖s‖²σ_e²)), √(2τ/(1+ν‖s‖²σ_e²)))
    """
    if nu < 0 or tau < 0 or gamma_hat < 0 or sigma_e2 < 0:
        raise DomainError("Parâmetros de p_md devem ser não negativos")
    x = nu * s_energy
    denom = 1.0 + x * sigma_e2
    if gamma_hat == 0:
        return -math.expm1(-tau / denom)
    a = math.sqrt(2.0 * gamma_hat * x / denom)
    b = math.sqrt(2.0 * tau / denom)
    return _marcum_par(a, b)[1]


def solve_nu_star(pe, gamma_hat, sigma_e2, s_energy=1.0):
    """
    ν* > 0 tal que p_md(ν*, τ_th, γ̂) = p_e.

    p_md é decrescente em ν e p_md(0) = 1 - p_e > p_e quando p_e < 1/2,
    então a raiz existe e é única; limite superior expandido por dobras.
    """
    if not 0 < pe < 0.5:
        raise InfeasibleError(f"Sem ν* para p_e={pe}: é preciso 0 < p_e < 0.5")
    tau = threshold(pe)

    def excesso(nu):
        return p_md(nu, tau, gamma_hat, sigma_e2, s_energy) - pe

    alto = 1.0
    while excesso(alto) > 0:
        alto *= 2.0
        if alto > 1e300:
            raise InfeasibleError("p_md não atinge p_e: sem ganho médio nem variância de canal")
    baixo = alto / 2.0 if alto > 1.0 else 0.0
    logger.debug("ν* em [%g, %g] para p_e=%g", baixo, alto, pe)
    return optimize.brentq(excesso, baixo, alto, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def phi_s_formula(nu_star, params):
    """φ_s = N0 W_tot ν* T_sy ‖s‖² / (2π)²"""
    if nu_star <= 0:
        raise DomainError("ν* deve ser positivo")
    return params.noise_power * nu_star * params.symbol_time * params.symbol_energy / (2.0 * math.pi) ** 2


def phi_s(nu_star, params):
    """φ_s em J/rad²; com override configurado devolve o valor calibrado"""
    if params.phi_s_override is not None:
        return params.phi_s_override
    return phi_s_formula(nu_star, params)


@dataclass(frozen=True)
class DetectionDesign:
    pe: float
    tau: float
    nu_star: float
    phi_s: float
    s_energy: float
    symbol_time: float

    @property
    def x_star(self):
        """ν*‖s‖²: SNR efetiva no detector com energia mínima"""
        return self.nu_star * self.s_energy

    @property
    def p_fa(self):
        return false_alarm(self.tau)


def design_detector(params, pe=None):
    """
    Projeta o detector para p_e (padrão: params.pe).

    Com φ_s calibrado (override) e p_e diferente da referência, φ_s é
    reescalado por ν*(p_e)/ν*(p_ref).
    """
    pe = params.pe if pe is None else pe
    sigma2 = params.sigma_e2
    nu_star = solve_nu_star(pe, params.gamma_hat, sigma2, params.symbol_energy)
    if params.phi_s_override is not None:
        referencia = solve_nu_star(params.phi_s_reference_pe, params.gamma_hat, sigma2, params.symbol_energy)
        densidade = params.phi_s_override * nu_star / referencia
    else:
        densidade = phi_s_formula(nu_star, params)
    return DetectionDesign(
        pe=pe,
        tau=threshold(pe),
        nu_star=nu_star,
        phi_s=densidade,
        s_energy=params.symbol_energy,
        symbol_time=params.symbol_time,
    )
