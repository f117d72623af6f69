# services/simulator.py
"""
Motor Monte-Carlo de quadros.

Sorteia o canal, executa a política slot a slot com feedback perfeito,
erros injetados ou detecção no nível de sinal, contabiliza energia e
bits e agrega potência/vazão com intervalos de confiança.
"""
import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from django.conf import settings

from ..exceptions import DomainError, ProtocolError
from ..utils.angleset import PiecewisePrior
from . import policies
from .detection import design_detector
from .outage import design_outage
from .phy import channel_snr, draw_channel
from .planner import BeamAlignmentPlanner, error_recursions

logger = logging.getLogger(__name__)

NONE = 'none'
INJECTED = 'injected'
SIGNAL = 'signal'
ERROR_MODES = (NONE, INJECTED, SIGNAL)

Z_95 = 1.959963984540054
RECORD_COLUMNS = ('trial', 'policy', 'energy_J', 'bits', 'aligned', 'e_flag', 'L_used')


@dataclass(frozen=True)
class SimulationOptions:
    """Knobs do protocolo e do modelo de erro que não são constantes físicas"""

    p_fa: float = None
    p_md: float = None
    p_cmp: float = None
    beta_start: str = policies.BS
    nb_bs: int = 32
    nb_ue: int = 32
    bisection_levels: int = 10
    prior_t: PiecewisePrior = None
    prior_r: PiecewisePrior = None


@dataclass(frozen=True)
class Scenario:
    """Tudo o que um quadro precisa, já projetado (picklável)"""

    params: object
    policy: str
    error_mode: str
    options: SimulationOptions
    schedule: object
    detection: object
    outage: object

    @property
    def p_fa(self):
        return self.params.pe if self.options.p_fa is None else self.options.p_fa

    @property
    def p_md(self):
        return self.params.pe if self.options.p_md is None else self.options.p_md

    @property
    def p_cmp(self):
        if self.options.p_cmp is not None:
            return self.options.p_cmp
        return max(self.p_fa, self.p_md)


@dataclass(frozen=True)
class FrameOutcome:
    energy_total: float
    energy_align: float
    energy_data: float
    bits_delivered: float
    aligned: bool
    error_event: bool
    L_used: int
    data_success: bool = False
    align_time: float = 0.0


@dataclass(frozen=True)
class MonteCarloStats:
    trials: int
    mean_power: float
    power_ci: float
    mean_spectral_efficiency: float
    spectral_efficiency_ci: float
    mean_throughput: float
    throughput_ci: float
    alignment_success_rate: float
    outage_rate: float
    error_event_rate: float
    mean_L_used: float = 0.0
    power_std: float = 0.0
    throughput_std: float = 0.0

    def as_dict(self):
        return {nome: getattr(self, nome) for nome in self.__dataclass_fields__}


@dataclass(frozen=True)
class ComparisonRow:
    quantity: str
    analytic: float
    empirical: float
    z_score: float

    @property
    def flagged(self):
        return abs(self.z_score) > 3.0


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple
    trials: int
    p_fa: float
    p_md: float
    stats: MonteCarloStats = field(repr=False, default=None)

    @property
    def flagged(self):
        return any(linha.flagged for linha in self.rows)


def build_scenario(params, policy=policies.DFS, error_mode=NONE, options=None, pe=None):
    """Projeta detector, outage e plano para um cenário de simulação"""
    if policy not in policies.POLICY_CHOICES:
        raise DomainError(f"Política desconhecida: {policy}")
    if error_mode not in ERROR_MODES:
        raise DomainError(f"Modo de erro desconhecido: {error_mode}")
    options = options or SimulationOptions()
    detection = design_detector(params, pe)
    outage = design_outage(params)
    schedule = BeamAlignmentPlanner(params, phi_s=detection.phi_s, outage=outage).optimize_L()
    return Scenario(
        params=params,
        policy=policy,
        error_mode=error_mode,
        options=options,
        schedule=schedule,
        detection=detection,
        outage=outage,
    )


# ==========================================
# CANAL VISTO PELA POLÍTICA
# ==========================================

class ChannelResponder(policies.FeedbackOracle):
    """Oráculo de feedback sobre um canal sorteado"""

    def __init__(self, channel, scenario, rng):
        self.channel = channel
        self.scenario = scenario
        self.rng = rng

    def contains(self, action):
        return bool(self.channel.in_beam(action.beam_t, action.beam_r))

    def statistic(self, action):
        """|z|², z = √x·a + n, n ~ CN(0, 1), x escalado pela energia do beacon"""
        det = self.scenario.detection
        piso = det.phi_s * action.beam_measure
        x = det.x_star * action.energy / piso if piso > 0 else 0.0
        amplitude = self.channel.beacon_amplitude(action.beam_t, action.beam_r)
        ruido = complex(self.rng.standard_normal(), self.rng.standard_normal()) * math.sqrt(0.5)
        return abs(math.sqrt(x) * amplitude + ruido) ** 2

    def feedback(self, action):
        modo = self.scenario.error_mode
        if modo == SIGNAL:
            return policies.ACK if self.statistic(action) > self.scenario.detection.tau else policies.NACK
        verdade = self.contains(action)
        if modo == INJECTED:
            if verdade and self.rng.random() < self.scenario.p_md:
                return policies.NACK
            if not verdade and self.rng.random() < self.scenario.p_fa:
                return policies.ACK
        return policies.ACK if verdade else policies.NACK

    def strongest(self, actions):
        if self.scenario.error_mode == SIGNAL:
            return int(np.argmax([self.statistic(a) for a in actions]))
        certos = [i for i, a in enumerate(actions) if self.contains(a)]
        if not certos:
            return int(self.rng.integers(len(actions)))
        certo = certos[0]
        if self.scenario.error_mode == INJECTED and len(actions) > 1 and self.rng.random() < self.scenario.p_cmp:
            outros = [i for i in range(len(actions)) if i != certo]
            return outros[int(self.rng.integers(len(outros)))]
        return certo


# ==========================================
# QUADRO
# ==========================================

def _dentro(channel, state):
    return state.ut.contains(channel.theta_t[0]) and state.ur.contains(channel.theta_r[0])


def _priors(scenario):
    params = scenario.params
    prior_t = scenario.options.prior_t or PiecewisePrior.uniform(params.ut0)
    prior_r = scenario.options.prior_r or PiecewisePrior.uniform(params.ur0)
    return prior_t, prior_r


def _run_dfs(scenario, state, oracle, channel):
    params = scenario.params
    schedule = scenario.schedule
    decidir = policies.nonuniform_dfs_decide if scenario.policy == policies.DFS_NONUNIFORM else policies.dfs_decide
    energias = []
    erro = False
    for _ in range(schedule.L_star):
        acao = decidir(state, schedule, params, scenario.options.beta_start)
        if acao.kind != policies.ALIGN:
            raise ProtocolError("DFS comunicou antes de L*")
        energias.append(acao.energy)
        state = policies.apply_feedback(state, acao, oracle.feedback(acao), params)
        erro = erro or not _dentro(channel, state)
    acao = decidir(state, schedule, params, scenario.options.beta_start)
    if acao.kind != policies.COMMUNICATE:
        raise ProtocolError("DFS alinhou depois de L*")
    return state, acao, math.fsum(energias), schedule.L_star, schedule.L_star * params.slot, erro


def _run_baseline(scenario, state, oracle, channel):
    params = scenario.params
    opcoes = scenario.options
    phi_s = scenario.detection.phi_s
    if scenario.policy == policies.BISECTION:
        registro = policies.run_bisection(state, oracle, opcoes.bisection_levels, phi_s, params, opcoes.beta_start)
    else:
        registro = policies.run_exhaustive(state, oracle, scenario.policy, opcoes.nb_bs, opcoes.nb_ue, phi_s, params)
    acao = policies.baseline_data_action(registro.state, registro.duration, params, scenario.outage)
    erro = not _dentro(channel, registro.state)
    return registro.state, acao, registro.energy, registro.beacons, registro.duration, erro


def run_frame(scenario, rng):
    """Um quadro completo: canal, alinhamento, dados e contabilidade"""
    params = scenario.params
    prior_t, prior_r = _priors(scenario)
    channel = draw_channel(params, prior_t, prior_r, rng)
    nao_uniforme = scenario.policy == policies.DFS_NONUNIFORM
    state = policies.initial_state(
        params,
        prior_t if nao_uniforme else None,
        prior_r if nao_uniforme else None,
    )
    oracle = ChannelResponder(channel, scenario, rng)

    if scenario.policy in (policies.DFS, policies.DFS_NONUNIFORM):
        state, acao, energia_align, L_usado, tempo, erro = _run_dfs(scenario, state, oracle, channel)
    else:
        state, acao, energia_align, L_usado, tempo, erro = _run_baseline(scenario, state, oracle, channel)

    energia_dados = acao.total_energy
    alinhado = bool(acao.beam_t.contains(channel.theta_t[0]) and acao.beam_r.contains(channel.theta_r[0]))
    sucesso = False
    bits = 0.0
    if acao.rate > 0 and acao.beam_measure > 0:
        recebida = channel_snr(acao.power, acao.beam_t, acao.beam_r, channel, params)
        capacidade = params.bandwidth * math.log2(1.0 + recebida)
        sucesso = capacidade >= acao.rate * (1.0 - 1e-12)
        if sucesso:
            bits = acao.rate * acao.duration * acao.slots
    return FrameOutcome(
        energy_total=energia_align + energia_dados,
        energy_align=energia_align,
        energy_data=energia_dados,
        bits_delivered=bits,
        aligned=alinhado,
        error_event=erro,
        L_used=L_usado,
        data_success=sucesso,
        align_time=tempo,
    )


# ==========================================
# MONTE-CARLO
# ==========================================

def trial_rng(seed, trial):
    """Gerador independente por (seed, índice do ensaio)"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _run_chunk(scenario, seed, inicio, fim):
    return [run_frame(scenario, trial_rng(seed, t)) for t in range(inicio, fim)]


def _media_ic(valores):
    n = len(valores)
    media = float(np.mean(valores))
    if n < 2:
        return media, 0.0, 0.0
    desvio = float(np.std(valores, ddof=1))
    return media, Z_95 * desvio / math.sqrt(n), desvio


def aggregate(outcomes, params):
    """Redução associativa dos quadros em MonteCarloStats"""
    if not outcomes:
        raise DomainError("Nenhum ensaio para agregar")
    potencia = np.array([o.energy_total for o in outcomes]) / params.frame
    vazao = np.array([o.bits_delivered for o in outcomes]) / params.frame
    alinhados = np.array([o.aligned for o in outcomes])
    sucesso = np.array([o.data_success for o in outcomes])
    media_p, ic_p, desvio_p = _media_ic(potencia)
    media_t, ic_t, desvio_t = _media_ic(vazao)
    n_alinhados = int(alinhados.sum())
    return MonteCarloStats(
        trials=len(outcomes),
        mean_power=media_p,
        power_ci=ic_p,
        mean_spectral_efficiency=media_t / params.bandwidth,
        spectral_efficiency_ci=ic_t / params.bandwidth,
        mean_throughput=media_t,
        throughput_ci=ic_t,
        alignment_success_rate=float(alinhados.mean()),
        outage_rate=float((alinhados & ~sucesso).sum() / n_alinhados) if n_alinhados else 0.0,
        error_event_rate=float(np.mean([o.error_event for o in outcomes])),
        mean_L_used=float(np.mean([o.L_used for o in outcomes])),
        power_std=desvio_p,
        throughput_std=desvio_t,
    )


def simulate_frames(scenario, trials, seed, workers=None):
    """Lista de FrameOutcome na ordem dos ensaios, com pool opcional"""
    if trials < 1:
        raise DomainError("trials deve ser >= 1")
    workers = workers if workers is not None else getattr(settings, 'BEAMALIGN_WORKERS', 1)
    if workers <= 1 or trials < 2 * workers:
        return _run_chunk(scenario, seed, 0, trials)
    passo = math.ceil(trials / workers)
    limites = [(i, min(i + passo, trials)) for i in range(0, trials, passo)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        partes = pool.map(_run_chunk, *zip(*[(scenario, seed, a, b) for a, b in limites]))
        return [o for parte in partes for o in parte]


def run_monte_carlo(scenario, trials, seed, workers=None, records=None):
    """
    Agrega `trials` quadros independentes.

    Determinístico em (cenário, trials, seed). Com records, grava um CSV
    por ensaio.
    """
    logger.info(
        "Monte-Carlo: política=%s modo=%s trials=%d seed=%s",
        scenario.policy, scenario.error_mode, trials, seed,
    )
    outcomes = simulate_frames(scenario, trials, seed, workers)
    if records:
        write_records(outcomes, scenario.policy, records)
    stats = aggregate(outcomes, scenario.params)
    logger.info(
        "Monte-Carlo concluído: P=%.6e W (±%.2e), SE=%.4f bps/Hz",
        stats.mean_power, stats.power_ci, stats.mean_spectral_efficiency,
    )
    return stats


def write_records(outcomes, policy, caminho):
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    with caminho.open('w', newline='') as arquivo:
        escritor = csv.writer(arquivo, lineterminator='\n')
        escritor.writerow(RECORD_COLUMNS)
        for trial, o in enumerate(outcomes):
            escritor.writerow([
                trial, policy, repr(o.energy_total), repr(o.bits_delivered),
                int(o.aligned), int(o.error_event), o.L_used,
            ])
    logger.info("Registros por ensaio gravados em %s", caminho)


def _z(analitico, media, desvio, n):
    erro_padrao = desvio / math.sqrt(n) if n > 0 else 0.0
    if erro_padrao == 0:
        escala = max(abs(analitico), abs(media), 1e-300)
        return 0.0 if abs(media - analitico) <= 1e-9 * escala else math.inf
    return (media - analitico) / erro_padrao


def analytic_vs_empirical(params, p_fa, p_md, trials, seed, options=None, workers=None):
    """
    DFS com erros injetados contra as fórmulas fechadas de vazão e
    potência sob propagação de erros.
    """
    options = replace(options or SimulationOptions(), p_fa=p_fa, p_md=p_md)
    scenario = build_scenario(params, policies.DFS, INJECTED, options)
    analise = error_recursions(scenario.schedule, p_fa, p_md)
    stats = run_monte_carlo(scenario, trials, seed, workers)
    linhas = (
        ComparisonRow(
            'throughput_bps', analise.T_bar_err, stats.mean_throughput,
            _z(analise.T_bar_err, stats.mean_throughput, stats.throughput_std, trials),
        ),
        ComparisonRow(
            'power_W', analise.P_bar_err, stats.mean_power,
            _z(analise.P_bar_err, stats.mean_power, stats.power_std, trials),
        ),
    )
    relatorio = ComparisonReport(rows=linhas, trials=trials, p_fa=p_fa, p_md=p_md, stats=stats)
    if relatorio.flagged:
        logger.warning("Divergência analítico x empírico acima de 3σ: %s", linhas)
    return relatorio
