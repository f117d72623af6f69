# services/experimentos.py
"""
Orquestração dos experimentos expostos pelos comandos e pela API:
relatório de plano, varredura de p_e, comparação de políticas e
degradação multi-cluster.
"""
import csv
import logging
from dataclasses import replace
from pathlib import Path

from ..exceptions import DomainError, InfeasibleError
from . import policies
from .detection import design_detector
from .phy import watts_to_dbm
from .planner import BeamAlignmentPlanner, error_recursions
from .simulator import SIGNAL, build_scenario, run_monte_carlo

logger = logging.getLogger(__name__)

SWEEP_PE_HEADER = ('pe', 'rmin_bps', 'power_dBm', 'thr_bps')
MULTICLUSTER_HEADER = ('weak_fraction', 'policy', 'power_dBm', 'spectral_efficiency', 'rmin_bps')
MATCH_RTOL = 1e-12
MATCH_MAX_ITER = 60
MC_MATCH_RTOL = 1e-6
MC_MATCH_MAX_ITER = 8


def format_dbm(watts):
    """Potência em dBm com resolução de 1e-3 dB"""
    if watts <= 0:
        return '-inf'
    return f"{watts_to_dbm(watts):.3f}"


def write_csv(caminho, header, linhas):
    """CSV com cabeçalho, vírgula, ponto decimal e LF; arquivo sempre novo"""
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    with caminho.open('w', newline='') as arquivo:
        escritor = csv.writer(arquivo, lineterminator='\n')
        escritor.writerow(header)
        escritor.writerows(linhas)
    logger.info("CSV gravado em %s (%d linhas)", caminho, len(linhas))
    return caminho


def _num(valor):
    return repr(float(valor))


# ==========================================
# PLANO
# ==========================================

def plan_report(params, pe=None):
    """Saídas do planejador para um conjunto de parâmetros"""
    detection = design_detector(params, pe)
    planner = BeamAlignmentPlanner(params, phi_s=detection.phi_s)
    schedule = planner.optimize_L()
    crescente = all(a < b for a, b in zip(schedule.rho, schedule.rho[1:]))
    faixa = all(0 < r < 0.5 for r in schedule.rho)
    sem_alinhamento = planner.dc_value(0) * params.u0_measure / params.frame
    logger.info("Plano: L*=%d, P̄_u=%s dBm", schedule.L_star, format_dbm(schedule.P_bar_u))
    return {
        'L_star': schedule.L_star,
        'L_min': schedule.L_min,
        'rho': list(schedule.rho),
        'rho_check': 'PASS' if crescente and faixa else 'FAIL',
        'theta': schedule.theta,
        'data_rate_bps': schedule.data_rate,
        'v0': schedule.v0,
        'P_bar_u_W': schedule.P_bar_u,
        'P_bar_u_dBm': format_dbm(schedule.P_bar_u),
        'no_alignment_power_W': sem_alinhamento,
        'phi_s': detection.phi_s,
        'nu_star': detection.nu_star,
        'tau': detection.tau,
        'schedule': schedule,
    }


def format_plan(relatorio):
    """Relatório texto determinístico do plano"""
    potencia = relatorio['P_bar_u_W']
    linhas = [
        f"L* = {relatorio['L_star']}",
        f"L_min = {relatorio['L_min'] if relatorio['L_min'] is not None else 'none'}",
        "rho = [" + ', '.join(f"{r:.12g}" for r in relatorio['rho']) + "]",
        f"rho increasing check = {relatorio['rho_check']}",
        f"theta = {relatorio['theta']:.12g}",
        f"R_dc = {relatorio['data_rate_bps']:.12g} bps",
        f"v_0 = {relatorio['v0']:.12g} J/rad^2",
        f"P_bar_u = {relatorio['P_bar_u_dBm']} dBm" if potencia > 0 else "P_bar_u = 0 W",
        f"phi_s = {relatorio['phi_s']:.12g} J/rad^2",
        f"nu_star = {relatorio['nu_star']:.12g}",
    ]
    return '\n'.join(linhas) + '\n'


# ==========================================
# VARREDURA DE p_e
# ==========================================

def _throughput(params, rmin, phi_s, pe):
    ajustado = replace(params, rmin=rmin)
    schedule = BeamAlignmentPlanner(ajustado, phi_s=phi_s).optimize_L()
    return error_recursions(schedule, pe, pe), schedule


def throughput_matched_rmin(params, pe, alvo, phi_s=None):
    """
    R_min tal que T̄_err(R_min) = alvo, por ponto fixo
    R ← alvo / ((1-ε)·∏[(1-ρ_k)(1-p) + ρ_k(1-p)]).

    Devolve (R_min, ErrorAnalysis, Schedule).
    """
    if alvo <= 0:
        raise DomainError("Vazão alvo deve ser positiva")
    phi_s = phi_s if phi_s is not None else design_detector(params, pe).phi_s
    rmin = alvo / (1.0 - params.epsilon)
    analise, schedule = _throughput(params, rmin, phi_s, pe)
    for _ in range(MATCH_MAX_ITER):
        novo = rmin * alvo / analise.T_bar_err
        if abs(novo - rmin) <= MATCH_RTOL * rmin:
            rmin = novo
            break
        rmin = novo
        analise, schedule = _throughput(params, rmin, phi_s, pe)
    else:
        logger.warning("Casamento de vazão não convergiu (p_e=%g, alvo=%g)", pe, alvo)
    analise, schedule = _throughput(params, rmin, phi_s, pe)
    return rmin, analise, schedule


def sweep_pe(params, pe_grid, se_grid):
    """
    Potência analítica P̄_err contra p_e com p_fa = p_md = p_e, para cada
    eficiência espectral entregue. φ_s(p_e) é reprojetado em cada ponto.
    """
    linhas = []
    for se in se_grid:
        alvo = se * params.bandwidth
        for pe in pe_grid:
            phi_s = design_detector(params, pe).phi_s
            rmin, analise, _ = throughput_matched_rmin(params, pe, alvo, phi_s)
            linhas.append({
                'se': se,
                'pe': pe,
                'rmin_bps': rmin,
                'power_W': analise.P_bar_err,
                'thr_bps': analise.T_bar_err,
            })
    return linhas


def sweep_pe_rows(linhas):
    return [
        (_num(l['pe']), _num(l['rmin_bps']), format_dbm(l['power_W']), _num(l['thr_bps']))
        for l in linhas
    ]


# ==========================================
# COMPARAÇÃO DE POLÍTICAS
# ==========================================

def compare(params, options, politicas, se_grid, trials, seed, error_mode, workers=None):
    """Monte-Carlo de cada política em cada ponto de eficiência espectral"""
    if not politicas:
        raise DomainError("Lista de políticas vazia")
    linhas = []
    for se in se_grid:
        ajustado = replace(params, rmin=se * params.bandwidth)
        linha = {'spectral_efficiency': se, 'stats': {}}
        for politica in politicas:
            cenario = build_scenario(ajustado, politica, error_mode, options)
            linha['stats'][politica] = run_monte_carlo(cenario, trials, seed, workers)
        linhas.append(linha)
    return linhas


def compare_header(politicas):
    return ('spectral_efficiency',) + tuple(f"{p}_power_dBm" for p in politicas)


def compare_rows(linhas, politicas):
    return [
        (_num(l['spectral_efficiency']),) + tuple(format_dbm(l['stats'][p].mean_power) for p in politicas)
        for l in linhas
    ]


# ==========================================
# MULTI-CLUSTER
# ==========================================

def matched_monte_carlo(params, politica, options, alvo, trials, seed, workers=None):
    """
    Monte-Carlo com R_min ajustado até a vazão média igualar `alvo`,
    por ponto fixo R ← R·alvo/T̂(R) com os mesmos ensaios em cada passo.

    Devolve (R_min, MonteCarloStats).
    """
    if alvo <= 0:
        raise DomainError("Vazão alvo deve ser positiva")
    rmin = alvo / (1.0 - params.epsilon)
    stats = None
    for _ in range(MC_MATCH_MAX_ITER):
        cenario = build_scenario(replace(params, rmin=rmin), politica, SIGNAL, options)
        stats = run_monte_carlo(cenario, trials, seed, workers)
        if stats.mean_throughput <= 0:
            raise InfeasibleError(f"{politica}: nenhum quadro entregou dados com R_min={rmin:.6g}")
        razao = alvo / stats.mean_throughput
        if abs(razao - 1.0) <= MC_MATCH_RTOL:
            return rmin, stats
        rmin *= razao
    logger.warning("%s: vazão casada não convergiu (alvo=%g, obtido=%g)", politica, alvo, stats.mean_throughput)
    return rmin, stats


def multicluster(params, options, fracoes, se, politicas, trials, seed, workers=None):
    """
    Canal com K = 2 clusters e detecção no nível de sinal, ϱ variando.

    A vazão entregue é fixada em (1-ε)·SE·W; cada política paga em
    potência a energia perdida no cluster fraco (dados projetados para a
    fração dominante 1-ϱ e quadros que seguem o cluster errado).
    """
    linhas = []
    alvo = (1.0 - params.epsilon) * se * params.bandwidth
    for fracao in fracoes:
        ajustado = replace(params, clusters=2, weak_cluster_fraction=fracao)
        for politica in politicas:
            rmin, stats = matched_monte_carlo(ajustado, politica, options, alvo, trials, seed, workers)
            logger.info(
                "ϱ=%g %s: R_min casado %.6g bps, %s dBm", fracao, politica, rmin, format_dbm(stats.mean_power)
            )
            linhas.append({
                'weak_fraction': fracao,
                'policy': politica,
                'rmin_bps': rmin,
                'stats': stats,
            })
    return linhas


def multicluster_rows(linhas):
    return [
        (
            _num(l['weak_fraction']), l['policy'], format_dbm(l['stats'].mean_power),
            _num(l['stats'].mean_spectral_efficiency), _num(l['rmin_bps']),
        )
        for l in linhas
    ]


DEFAULT_MULTICLUSTER_POLICIES = (policies.DFS, policies.BISECTION)
