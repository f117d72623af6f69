# services/planner.py
"""
Planejador da busca fracionária desacoplada.

Recursões de valor, comprimento ótimo L* da fase de alinhamento,
parâmetros fracionários ρ_k, potência analítica P̄_u e a análise de
propagação de erros (cadeia de Markov do flag e_k).

Todas as grandezas internas são densidades de energia (J/rad²); a
multiplicação por |U_0| acontece só no relatório de potência.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError, InfeasibleError
from .detection import design_detector
from .outage import design_outage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Schedule:
    """Saída do planejador (imutável)"""

    L_star: int
    rho: tuple
    theta: float
    data_rate: float
    v: tuple
    P_bar_u: float
    L_min: int = None
    phi_s: float = 0.0
    phi_d_coefficient: float = 0.0
    slots: int = 0
    rmin: float = 0.0
    epsilon: float = 0.0
    u0_measure: float = 0.0
    frame: float = 0.0

    @property
    def v0(self):
        return self.v[0]

    @property
    def alignment_product(self):
        """∏ρ_k: fração do suporte que sobra no caminho só de ACKs"""
        return math.prod(self.rho)


@dataclass(frozen=True)
class ErrorAnalysis:
    h: tuple
    u: tuple
    T_bar_err: float
    P_bar_err: float
    p_fa: float
    p_md: float


def rho_schedule(L_star, v_last, phi_s):
    """
    ρ_0..ρ_{L*-1} pela recursão fechada:
    ρ_{L*-1} = 1/2 - φ_s/(4 v_{L*}),  ρ_k = (1-ρ_{k+1}) ρ_{k+1} / (1-2ρ_{k+1}²)
    """
    if L_star <= 0:
        return []
    rho = [0.0] * L_star
    rho[-1] = 0.5 - phi_s / (4.0 * v_last)
    for k in range(L_star - 2, -1, -1):
        seguinte = rho[k + 1]
        rho[k] = (1.0 - seguinte) * seguinte / (1.0 - 2.0 * seguinte ** 2)
    return rho


def rho_from_value(v_next, phi_s):
    """ρ_k = ½(1 - φ_s/(2v_{k+1}))⁺"""
    if v_next <= 0:
        return 0.0
    return max(0.0, 0.5 * (1.0 - phi_s / (2.0 * v_next)))


def error_recursions(schedule, p_fa, p_md):
    """
    Vazão e potência médias sob falso alarme/misdetecção.

    T̄_err = (1-ε) R_min ∏[(1-ρ_k)(1-p_fa) + ρ_k(1-p_md)]
    P̄_err = P̄_u + (h_0 + u_0)|U_0| / T_fr
    """
    for nome, p in (('p_fa', p_fa), ('p_md', p_md)):
        if not 0 <= p < 1:
            raise DomainError(f"{nome} fora de [0, 1): {p}")
    L = schedule.L_star
    phi_s = schedule.phi_s
    h = [0.0] * (L + 1)
    u = [0.0] * (L + 1)
    for k in range(L - 1, -1, -1):
        rho = schedule.rho[k]
        h[k] = phi_s * (rho - p_fa) / 2.0 + (rho * p_fa + (1.0 - rho) * (1.0 - p_fa)) * h[k + 1]
        u[k] = (
            (rho ** 2 * (1.0 - p_md) + (1.0 - rho) ** 2 * (1.0 - p_fa)) * u[k + 1]
            - (1.0 - p_fa - p_md) * rho * (phi_s / 2.0 + h[k + 1] * (1.0 - 2.0 * rho))
        )
    produto = math.prod((1.0 - rho) * (1.0 - p_fa) + rho * (1.0 - p_md) for rho in schedule.rho)
    return ErrorAnalysis(
        h=tuple(h),
        u=tuple(u),
        T_bar_err=(1.0 - schedule.epsilon) * schedule.rmin * produto,
        P_bar_err=schedule.P_bar_u + (h[0] + u[0]) * schedule.u0_measure / schedule.frame,
        p_fa=p_fa,
        p_md=p_md,
    )


def expected_by_enumeration(schedule, p_fa, p_md):
    """
    Potência e vazão esperadas percorrendo a árvore de (suporte, flag e_k).

    Cada nó é a fração m = |U_k|/|U_0| alcançada e o flag de erro; nós
    iguais são fundidos acumulando probabilidade e energia ponderada.
    Sob priori uniforme θ|(U_k, e_k=0) é uniforme em U_k. Confere as
    recursões de trás para frente de error_recursions.
    """
    # (m, e) -> [probabilidade, energia esperada acumulada (já ponderada)]
    nos = {(1.0, 0): [1.0, 0.0]}
    for rho in schedule.rho:
        seguintes = {}

        def somar(chave, prob, energia):
            if prob <= 0:
                return
            acumulado = seguintes.setdefault(chave, [0.0, 0.0])
            acumulado[0] += prob
            acumulado[1] += energia

        for (m, e), (prob, energia) in nos.items():
            custo = schedule.phi_s * rho * m
            ack, nack = rho * m, (1.0 - rho) * m
            if e == 0:
                ramos = (
                    ((ack, 0), rho * (1.0 - p_md)),
                    ((nack, 1), rho * p_md),
                    ((ack, 1), (1.0 - rho) * p_fa),
                    ((nack, 0), (1.0 - rho) * (1.0 - p_fa)),
                )
            else:
                ramos = (((ack, 1), p_fa), ((nack, 1), 1.0 - p_fa))
            for chave, p in ramos:
                somar(chave, prob * p, p * (energia + prob * custo))
        nos = seguintes

    energia_total = 0.0
    sucesso = 0.0
    for (m, e), (prob, energia) in nos.items():
        energia_total += energia + prob * schedule.v[-1] * m
        if e == 0:
            sucesso += prob
    potencia = energia_total * schedule.u0_measure / schedule.frame
    vazao = (1.0 - schedule.epsilon) * schedule.rmin * sucesso
    return potencia, vazao


class BeamAlignmentPlanner:
    """Programação dinâmica de horizonte finito do alinhamento + dados"""

    def __init__(self, params, phi_s=None, outage=None):
        self.params = params
        self.outage = outage or design_outage(params)
        self.phi_s = phi_s if phi_s is not None else design_detector(params).phi_s
        if self.phi_s < 0:
            raise DomainError("φ_s não pode ser negativo")

    @property
    def N(self):
        return self.params.slots

    def phi_d(self, rate):
        return self.outage.phi_d(rate, self.params)

    def data_rate(self, L):
        return self.N * self.params.rmin / (self.N - L)

    def dc_value(self, L):
        """v_L^{(L)} = (N-L) φ_d(N R_min/(N-L), ε)"""
        if not 0 <= L < self.N:
            raise DomainError(f"L={L} fora de [0, N={self.N})")
        if self.params.rmin == 0:
            return 0.0
        return (self.N - L) * self.phi_d(self.data_rate(L))

    def v_recursion(self, L):
        """v_0..v_L com a forma truncada v_k = v_{k+1} - [(2v_{k+1}-φ_s)⁺]²/(8v_{k+1})"""
        v = [0.0] * (L + 1)
        v[L] = self.dc_value(L)
        for k in range(L - 1, -1, -1):
            w = v[k + 1]
            if w <= self.phi_s / 2.0:
                v[k] = w
            else:
                v[k] = w - (2.0 * w - self.phi_s) ** 2 / (8.0 * w)
        return v

    def l_min(self):
        """Menor L com (N-L) φ_d(N R_min/(N-L)) > φ_s/2; None se nenhum"""
        for L in range(self.N):
            try:
                if self.dc_value(L) > self.phi_s / 2.0:
                    return L
            except InfeasibleError:
                # dc_value cresce com L: os seguintes também estouram
                return None
        return None

    def candidates(self, l_max=None):
        l_max = self.params.l_max if l_max is None else l_max
        l_min = self.l_min()
        ret = [0]
        if l_min is not None:
            ret.extend(L for L in range(max(l_min, 1), min(self.N - 1, l_max) + 1))
        return ret

    def optimize_L(self, l_max=None):
        """
        L* = argmin_{L∈{0}∪{L_min..min(N-1, L_max)}} v_0^{(L)}.

        Empates ficam com o menor L.
        """
        melhor_L, melhor_v = None, None
        for L in self.candidates(l_max):
            try:
                v = self.v_recursion(L)
            except InfeasibleError:
                continue
            if melhor_v is None or v[0] < melhor_v[0]:
                melhor_L, melhor_v = L, v
        if melhor_L is None:
            raise InfeasibleError(
                f"R_min={self.params.rmin:.3e} bit/s não é representável em nenhum L"
            )
        return self._schedule(melhor_L, melhor_v)

    def schedule_for(self, L):
        """Schedule com L fixo (diagnóstico; L < L_min tem ρ truncado em 0)"""
        return self._schedule(L, self.v_recursion(L))

    def _schedule(self, L, v):
        if L > 0 and v[L] > self.phi_s / 2.0:
            rho = rho_schedule(L, v[L], self.phi_s)
        else:
            rho = [rho_from_value(v[k + 1], self.phi_s) for k in range(L)]
        params = self.params
        potencia = v[0] * params.u0_measure / params.frame
        schedule = Schedule(
            L_star=L,
            rho=tuple(rho),
            theta=self.outage.theta,
            data_rate=self.data_rate(L),
            v=tuple(v),
            P_bar_u=potencia,
            L_min=self.l_min(),
            phi_s=self.phi_s,
            phi_d_coefficient=self.outage.coefficient,
            slots=self.N,
            rmin=params.rmin,
            epsilon=params.epsilon,
            u0_measure=params.u0_measure,
            frame=params.frame,
        )
        logger.debug("Plano: L*=%d, v_0=%.6e J/rad², P̄_u=%.6e W", L, v[0], potencia)
        return schedule

    # ------------------------------------------------------------------
    # Oráculos estruturais (instâncias pequenas)
    # ------------------------------------------------------------------

    def switch_rule_values(self):
        """
        Regra de troca min{Γ_k, Λ_k} de trás para frente.

        Γ_k comunica já à taxa do tempo restante; Λ_k sonda mais um slot e
        segue ótimo. Devolve (V_0, [(k, Γ_k, Λ_k), ...]) com k crescente.
        """
        valor = math.inf
        linhas = []
        for k in range(self.N - 1, -1, -1):
            try:
                gamma_k = self.dc_value(k)
            except InfeasibleError:
                gamma_k = math.inf
            if not math.isfinite(valor):
                lambda_k = math.inf
            elif valor > 0:
                excesso = max(2.0 * valor - self.phi_s, 0.0)
                lambda_k = valor - excesso ** 2 / (8.0 * valor)
            else:
                lambda_k = valor
            linhas.append((k, gamma_k, lambda_k))
            valor = min(gamma_k, lambda_k)
        linhas.reverse()
        return valor, linhas

    def snapped_value(self, L, rho_step):
        """Valor da política de duas fases com ρ_k restrito à grade"""
        grade = np.arange(rho_step, 1.0 - 1e-12, rho_step)
        w = self.dc_value(L)
        for _ in range(L):
            custos = self.phi_s * grade + (grade ** 2 + (1.0 - grade) ** 2) * w
            w = min(w, float(custos.min()))
        return w

    def default_rate_grid(self, pontos=8):
        """Taxas N R_min/(N-L), L=0..N-1, mais 0 e uma taxa extra"""
        D0 = self.params.rmin * self.params.frame
        T = self.params.slot
        taxas = {0.0}
        taxas.update(D0 / ((self.N - L) * T) for L in range(self.N))
        maior = max(taxas)
        if maior == 0:
            return [0.0]
        fator = 2.0
        while len(taxas) < pontos:
            taxas.add(maior * fator)
            fator += 1.0
        return sorted(taxas)

    def interleaved_dp_value(self, rho_step=0.05, rate_grid=None):
        """
        DP de força bruta que permite intercalar alinhamento e dados.

        Estado (k, D); a ação de alinhamento custa φ_sρ + (ρ²+(1-ρ)²)V_{k+1}(D),
        a de dados φ_d(R) + V_{k+1}(max(D - RT, 0)). Tudo por unidade de |U_k|.
        """
        if self.N > 8:
            raise DomainError("Oráculo de DP só para N <= 8")
        taxas = self.default_rate_grid() if rate_grid is None else sorted(rate_grid)
        grade = np.arange(rho_step, 1.0 - 1e-12, rho_step)
        coef = grade ** 2 + (1.0 - grade) ** 2
        D0 = self.params.rmin * self.params.frame
        T = self.params.slot
        escala = D0 if D0 > 0 else 1.0
        custos_dados = {}
        for R in taxas:
            try:
                custos_dados[R] = self.phi_d(R)
            except InfeasibleError:
                continue
        memo = {}

        def valor(k, D):
            chave = (k, round(D / escala, 9))
            if chave in memo:
                return memo[chave]
            if k == self.N:
                ret = 0.0 if D <= 1e-9 * escala else math.inf
            else:
                seguinte = valor(k + 1, D)
                ret = seguinte  # ρ = 0 / R = 0: nada acontece
                if math.isfinite(seguinte):
                    ret = min(ret, float((self.phi_s * grade + coef * seguinte).min()))
                for R, custo in custos_dados.items():
                    if R <= 0:
                        continue
                    ret = min(ret, custo + valor(k + 1, max(D - R * T, 0.0)))
            memo[chave] = ret
            return ret

        return valor(0, D0)
