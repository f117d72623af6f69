# services/policies.py
"""
Políticas executáveis de alinhamento de feixe.

Busca fracionária desacoplada (DFS) com priori uniforme e não uniforme,
e os três protocolos de referência: bissecção (BiS), varredura exaustiva
convencional (CES) e interativa (IES).

As políticas não conhecem θ: toda informação chega por um oráculo de
feedback (ver FeedbackOracle), implementado pelo simulador.
"""
import logging
import math
from dataclasses import dataclass, replace

from ..exceptions import DomainError, InfeasibleError, ProtocolError
from ..utils.angleset import AngleSet, PiecewisePrior, top_mass_subset
from .outage import data_energy, design_outage

logger = logging.getLogger(__name__)

# ==========================================
# CONSTANTES
# ==========================================

BA = 'BA'
DC = 'DC'

ALIGN = 'align'
COMMUNICATE = 'communicate'

BS = 'bs'
UE = 'ue'

ACK = 'ACK'
NACK = 'NACK'
NULL = 'NULL'

DFS = 'dfs'
DFS_NONUNIFORM = 'dfs-nonuniform'
BISECTION = 'bisection'
CES = 'ces'
IES = 'ies'

POLICY_CHOICES = (DFS, DFS_NONUNIFORM, BISECTION, CES, IES)


# ==========================================
# TIPOS
# ==========================================

@dataclass(frozen=True)
class BeliefState:
    """Estado do MDP: suportes por dimensão, backlog, fase e slot"""

    ut: AngleSet
    ur: AngleSet
    backlog: float
    phase: str = BA
    slot: int = 0
    prior_t: PiecewisePrior = None
    prior_r: PiecewisePrior = None

    @property
    def measure(self):
        return self.ut.measure() * self.ur.measure()

    def support(self, dim):
        return self.ut if dim == BS else self.ur

    def prior(self, dim):
        return self.prior_t if dim == BS else self.prior_r


@dataclass(frozen=True)
class Action:
    """
    Ação de um slot (ou de uma sequência de slots de dados idênticos).

    energy é a energia de um slot; slots > 1 só ocorre em comunicação,
    onde taxa e feixe ficam constantes até o fim do quadro.
    """

    kind: str
    beta: str
    beam_t: AngleSet
    beam_r: AngleSet
    rate: float = 0.0
    energy: float = 0.0
    power: float = 0.0
    duration: float = 0.0
    slots: int = 1
    align_prob: float = 1.0

    @property
    def total_energy(self):
        return self.energy * self.slots

    @property
    def beam_measure(self):
        return self.beam_t.measure() * self.beam_r.measure()


@dataclass(frozen=True)
class AlignmentRecord:
    """Resultado da fase de alinhamento de um protocolo de referência"""

    state: BeliefState
    energy: float
    duration: float
    beacons: int
    actions: tuple = ()


def initial_state(params, prior_t=None, prior_r=None):
    """Estado no início do quadro: U_0, D_0 = R_min·T_fr, fase BA"""
    return BeliefState(
        ut=params.ut0,
        ur=params.ur0,
        backlog=params.rmin * params.frame,
        prior_t=prior_t,
        prior_r=prior_r,
    )


def probe_dimension(k, beta_start=BS):
    """β_k alternando BS, UE, BS, ... a partir de beta_start"""
    if beta_start not in (BS, UE):
        raise DomainError(f"beta_start inválido: {beta_start}")
    outra = UE if beta_start == BS else BS
    return beta_start if k % 2 == 0 else outra


# ==========================================
# CONTENÇÃO E AÇÕES ELEMENTARES
# ==========================================

def check_alignment_beam(state, dim, beam):
    """Feixe de alinhamento estritamente dentro do suporte sondado"""
    if not beam.is_strict_subset(state.support(dim)):
        raise ProtocolError(
            f"Feixe de alinhamento {beam} não é subconjunto estrito de {state.support(dim)}"
        )


def check_data_beam(state, beam_t, beam_r):
    if not (beam_t.issubset(state.ut) and beam_r.issubset(state.ur)):
        raise ProtocolError("Feixe de dados fora do suporte corrente")


def align_action(state, dim, beam, phi_s, params):
    """Beacon com energia no piso φ_s·|B_t|·|B_r|; a outra dimensão usa o suporte inteiro"""
    check_alignment_beam(state, dim, beam)
    beam_t, beam_r = (beam, state.ur) if dim == BS else (state.ut, beam)
    energia = phi_s * beam_t.measure() * beam_r.measure()
    return Action(
        kind=ALIGN,
        beta=dim,
        beam_t=beam_t,
        beam_r=beam_r,
        energy=energia,
        power=energia / params.beacon,
        duration=params.slot,
    )


def _probabilidade_no_feixe(state, beam_t, beam_r):
    """P(θ∈B|U) pela priori restrita ao suporte (1 fora de priori explícita)"""
    prob = 1.0
    for beam, suporte, prior in ((beam_t, state.ut, state.prior_t), (beam_r, state.ur, state.prior_r)):
        if prior is None:
            medida = suporte.measure()
            prob *= beam.measure() / medida if medida > 0 else 0.0
        else:
            massa = prior.mass(suporte)
            prob *= prior.mass(beam) / massa if massa > 0 else 0.0
    return prob


def data_action(state, beam_t, beam_r, rate, slots, duration, params):
    """
    Comunicação à taxa `rate` por `slots` slots de duração `duration`.

    Energia por slot: ψ_d(R)|B| / F̄⁻¹((1-ε)/P(θ∈B|U)) escalada pela
    fração duration/T.
    """
    check_data_beam(state, beam_t, beam_r)
    medida = beam_t.measure() * beam_r.measure()
    prob = _probabilidade_no_feixe(state, beam_t, beam_r)
    if rate > 0 and medida > 0:
        energia = data_energy(rate, medida, prob, params) * duration / params.slot
    else:
        energia = 0.0
    return Action(
        kind=COMMUNICATE,
        beta=None,
        beam_t=beam_t,
        beam_r=beam_r,
        rate=rate,
        energy=energia,
        power=energia / duration if duration > 0 else 0.0,
        duration=duration,
        slots=slots,
        align_prob=prob,
    )


# ==========================================
# BUSCA FRACIONÁRIA DESACOPLADA
# ==========================================

def dfs_decide(state, schedule, params, beta_start=BS):
    """
    Ação da DFS no slot state.slot.

    k < L*: sonda a dimensão β_k com take_fraction(ρ_k).
    k >= L*: dados até o fim do quadro, B_t = U_t e B_r = take_fraction(U_r, ϑ).
    """
    k = state.slot
    if k >= params.slots:
        raise DomainError(f"Slot {k} além do quadro de {params.slots}")
    if k < schedule.L_star:
        if state.phase != BA:
            raise ProtocolError("Alinhamento depois da fase de dados")
        dim = probe_dimension(k, beta_start)
        beam = state.support(dim).take_fraction(schedule.rho[k])
        return align_action(state, dim, beam, schedule.phi_s, params)
    beam_r = state.ur.take_fraction(schedule.theta) if schedule.theta < 1 else state.ur
    return data_action(
        state, state.ut, beam_r, schedule.data_rate,
        slots=params.slots - k, duration=params.slot, params=params,
    )


def _posterior_subset(state, dim, fracao):
    suporte = state.support(dim)
    prior = state.prior(dim)
    if prior is None:
        return suporte.take_fraction(fracao)
    return top_mass_subset(suporte, prior, fracao)


def nonuniform_dfs_decide(state, schedule, params, beta_start=BS):
    """
    DFS com priori constante por partes.

    Mesmas medidas da DFS uniforme, mas cada feixe é o subconjunto de
    maior massa a posteriori (priori restrita ao suporte sobrevivente).
    """
    k = state.slot
    if k >= params.slots:
        raise DomainError(f"Slot {k} além do quadro de {params.slots}")
    if k < schedule.L_star:
        if state.phase != BA:
            raise ProtocolError("Alinhamento depois da fase de dados")
        dim = probe_dimension(k, beta_start)
        beam = _posterior_subset(state, dim, schedule.rho[k])
        return align_action(state, dim, beam, schedule.phi_s, params)
    beam_r = _posterior_subset(state, UE, schedule.theta) if schedule.theta < 1 else state.ur
    return data_action(
        state, state.ut, beam_r, schedule.data_rate,
        slots=params.slots - k, duration=params.slot, params=params,
    )


def restrict(state, dim, beam, keep=True):
    """U_β ← U_β ∩ B (keep) ou U_β \\ B"""
    suporte = state.support(dim)
    novo = suporte.intersect(beam) if keep else suporte.subtract(beam)
    return replace(state, ut=novo) if dim == BS else replace(state, ur=novo)


def apply_feedback(state, action, feedback, params):
    """
    Atualização de crença: ACK → U∩B, NACK → U\\B na dimensão sondada;
    comunicação (NULL) só consome backlog.
    """
    if action.kind == ALIGN:
        if feedback not in (ACK, NACK):
            raise ProtocolError(f"Feedback {feedback} inválido para alinhamento")
        if state.phase != BA:
            raise ProtocolError("Transição DC→BA não é permitida")
        beam = action.beam_t if action.beta == BS else action.beam_r
        novo = restrict(state, action.beta, beam, keep=feedback == ACK)
        return replace(novo, slot=state.slot + 1)
    if feedback != NULL:
        raise ProtocolError(f"Feedback {feedback} inválido para comunicação")
    enviado = action.rate * action.duration * action.slots
    return replace(
        state,
        backlog=max(state.backlog - enviado, 0.0),
        phase=DC,
        slot=state.slot + action.slots,
    )


# ==========================================
# PROTOCOLOS DE REFERÊNCIA
# ==========================================

class FeedbackOracle:
    """
    Interface do canal visto pelas políticas.

    feedback(action) devolve ACK/NACK de um beacon; strongest(actions)
    devolve o índice do beacon percebido como mais forte.
    """

    def feedback(self, action):
        raise NotImplementedError

    def strongest(self, actions):
        raise NotImplementedError


def _beacon(state, dim, beam, phi_s, params, duration):
    """Beacon de referência: mesma energia-piso da DFS, duração própria"""
    acao = align_action(state, dim, beam, phi_s, params)
    return replace(acao, duration=duration)


def bisection_decide(state, level, phi_s, params, beta_start=BS):
    """
    Par de beacons de um nível da bissecção.

    Cada beacon cobre metade da dimensão sondada (energia φ_s·|U|/2 cada);
    o nível inteiro dura 2T_B + T_F.
    """
    dim = probe_dimension(level, beta_start)
    metades = state.support(dim).split_equal(2)
    return tuple(_beacon(state, dim, metade, phi_s, params, params.beacon) for metade in metades)


def bisection_level_time(params):
    return 2.0 * params.beacon + params.feedback


def run_bisection(state, oracle, levels, phi_s, params, beta_start=BS):
    """L_b níveis de bissecção; a UE escolhe a metade mais forte"""
    if levels > params.l_max:
        raise DomainError(f"Níveis de bissecção ({levels}) acima de L_max={params.l_max}")
    energia = 0.0
    acoes = []
    for nivel in range(levels):
        par = bisection_decide(state, nivel, phi_s, params, beta_start)
        escolhido = oracle.strongest(par)
        energia += math.fsum(a.energy for a in par)
        acoes.extend(par)
        dim = par[0].beta
        beam = par[escolhido].beam_t if dim == BS else par[escolhido].beam_r
        state = restrict(state, dim, beam)
    return AlignmentRecord(
        state=state,
        energy=energia,
        duration=levels * bisection_level_time(params),
        beacons=2 * levels,
        actions=tuple(acoes),
    )


def exhaustive_decide(state, dim, sector, grid, phi_s, params, initial_support=None, duration=None):
    """
    Beacon `sector` (0-based) da varredura exaustiva na dimensão dim.

    Os setores dividem o suporte inicial da dimensão em `grid` partes de
    mesma medida; a outra dimensão fica com o suporte corrente. Sem
    `duration` o beacon ocupa T_B (CES).
    """
    if grid < 1:
        raise DomainError("Grade da varredura deve ser >= 1")
    if not 0 <= sector < grid:
        raise DomainError(f"Setor {sector} fora de [0, {grid})")
    base = initial_support if initial_support is not None else state.support(dim)
    beam = base.split_equal(grid)[sector]
    return _beacon(state, dim, beam, phi_s, params, params.beacon if duration is None else duration)


def exhaustive_time(mode, beacons, nb_bs, nb_ue, params):
    """CES: (N_B^BS + N_B^UE)T_B + 2T_F; IES: (T_B+T_F) por beacon emitido"""
    if mode == CES:
        fases = (nb_bs > 1) + (nb_ue > 1)
        return (nb_bs * (nb_bs > 1) + nb_ue * (nb_ue > 1)) * params.beacon + fases * params.feedback
    return beacons * (params.beacon + params.feedback)


def run_exhaustive(state, oracle, mode, nb_bs, nb_ue, phi_s, params):
    """
    Varredura exaustiva em duas subfases (BS, depois UE com a BS fixa no
    setor vencedor).

    CES reporta uma vez por subfase o setor mais forte; IES para no
    primeiro ACK e, sem nenhum ACK, mantém o suporte da dimensão. Grade 1
    dispensa a subfase.
    """
    if mode not in (CES, IES):
        raise DomainError(f"Modo de varredura inválido: {mode}")
    energia = 0.0
    beacons = 0
    acoes = []
    for dim, grid in ((BS, nb_bs), (UE, nb_ue)):
        if grid < 1:
            raise DomainError("Grade da varredura deve ser >= 1")
        if grid == 1:
            continue
        suporte = state.support(dim)
        if mode == CES:
            varredura = tuple(
                exhaustive_decide(state, dim, s, grid, phi_s, params, suporte) for s in range(grid)
            )
            vencedor = varredura[oracle.strongest(varredura)]
            energia += math.fsum(a.energy for a in varredura)
            beacons += len(varredura)
            acoes.extend(varredura)
            state = restrict(state, dim, vencedor.beam_t if dim == BS else vencedor.beam_r)
            continue
        for setor in range(grid):
            acao = exhaustive_decide(
                state, dim, setor, grid, phi_s, params, suporte, params.beacon + params.feedback
            )
            energia += acao.energy
            beacons += 1
            acoes.append(acao)
            if oracle.feedback(acao) == ACK:
                state = restrict(state, dim, acao.beam_t if dim == BS else acao.beam_r)
                break
        else:
            logger.debug("IES sem ACK na dimensão %s: suporte mantido", dim)
    return AlignmentRecord(
        state=state,
        energy=energia,
        duration=exhaustive_time(mode, beacons, nb_bs, nb_ue, params),
        beacons=beacons,
        actions=tuple(acoes),
    )


def baseline_data_action(state, align_time, params, outage=None):
    """
    Fase de dados dos protocolos de referência: taxa R_min·T_fr/T_restante
    e feixe com |B| = ϑ|U| (só a dimensão da UE encolhe).
    """
    restante = params.frame - align_time
    if restante <= 0:
        raise InfeasibleError(f"Alinhamento ({align_time:.3e}s) ocupa o quadro inteiro")
    outage = outage or design_outage(params)
    rate = params.rmin * params.frame / restante
    beam_r = state.ur.take_fraction(outage.theta) if outage.theta < 1 else state.ur
    return data_action(state, state.ut, beam_r, rate, slots=1, duration=restante, params=params)
