# services/phy.py
"""
Primitivas da camada física no modelo de antenas setorizadas.

Perda de percurso, sorteio de canal (com estimativa ĥ), ganhos
setorizados e SNR instantânea. A fase de beamforming Ψ(θ) é descartada:
tudo o que vem depois só usa módulos.
"""
import cmath
import logging
import math
from dataclasses import dataclass, field

from ..exceptions import DomainError
from ..utils.angleset import AngleSet

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0


def dbm_to_watts(dbm):
    return 10 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts):
    if watts <= 0:
        return float('-inf')
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class SystemParams:
    """Constantes físicas e de protocolo de um enlace BS-UE"""

    wavelength_m: float = SPEED_OF_LIGHT / 30e9
    distance_m: float = 10.0
    path_loss_exponent: float = 2.0
    noise_psd: float = dbm_to_watts(-173.0)        # W/Hz
    bandwidth: float = 500e6                        # Hz
    frame: float = 20e-3                            # s
    slots: int = 200
    beacon: float = 50e-6                           # s
    feedback: float = 50e-6                         # s
    epsilon: float = 0.01
    rmin: float = 7.5e9                             # bits/s
    pe: float = 1e-5
    sigma_e2_override: float = None                 # None -> 1/ℓ(d) (Rayleigh sem CSI)
    gamma_hat: float = 0.0
    phi_s_override: float = dbm_to_watts(-94.0)     # J/rad²; None -> fórmula
    phi_s_reference_pe: float = 1e-5
    symbol_energy: float = 1.0                      # ‖s‖²
    symbol_time: float = 1e-9                       # T_sy
    l_max: int = 14
    ut0: AngleSet = field(default_factory=lambda: AngleSet.interval(-math.pi / 2, math.pi / 2))
    ur0: AngleSet = field(default_factory=lambda: AngleSet.interval(-math.pi / 2, math.pi / 2))
    antennas_bs: int = 128                          # só documentação
    antennas_ue: int = 128                          # só documentação
    clusters: int = 1
    weak_cluster_fraction: float = 0.0

    def __post_init__(self):
        positivos = {
            'wavelength_m': self.wavelength_m,
            'distance_m': self.distance_m,
            'noise_psd': self.noise_psd,
            'bandwidth': self.bandwidth,
            'frame': self.frame,
            'beacon': self.beacon,
            'feedback': self.feedback,
            'symbol_energy': self.symbol_energy,
            'symbol_time': self.symbol_time,
        }
        for nome, valor in positivos.items():
            if not valor > 0:
                raise DomainError(f"{nome} deve ser positivo (obtido {valor})")
        if self.slots < 1:
            raise DomainError("slots deve ser >= 1")
        if not 0 < self.epsilon < 1:
            raise DomainError("epsilon deve estar em (0, 1)")
        if not 0 < self.pe < 0.5:
            raise DomainError("p_e deve estar em (0, 0.5)")
        if self.rmin < 0:
            raise DomainError("R_min não pode ser negativo")
        if self.gamma_hat < 0 or (self.sigma_e2_override is not None and self.sigma_e2_override < 0):
            raise DomainError("Ganhos não podem ser negativos")
        if self.slot < self.beacon + self.feedback - 1e-15:
            raise DomainError(
                f"Slot T={self.slot:.3e}s não comporta beacon + feedback ({self.beacon + self.feedback:.3e}s)"
            )
        if self.clusters not in (1, 2):
            raise DomainError("clusters deve ser 1 ou 2")
        if not 0 <= self.weak_cluster_fraction < 0.5:
            raise DomainError("weak_cluster_fraction deve estar em [0, 0.5)")
        if self.phi_s_override is not None and self.phi_s_override <= 0:
            raise DomainError("phi_s deve ser positivo")
        if not self.ut0 or not self.ur0:
            raise DomainError("Suportes iniciais não podem ser vazios")

    @property
    def slot(self):
        """T = T_fr / N"""
        return self.frame / self.slots

    @property
    def sigma_e2(self):
        if self.sigma_e2_override is not None:
            return self.sigma_e2_override
        return 1.0 / path_loss(self)

    @property
    def dominant_fraction(self):
        """Fração da energia no cluster mais forte (1 com K = 1)"""
        return 1.0 - self.weak_cluster_fraction if self.clusters == 2 else 1.0

    @property
    def data_gamma_hat(self):
        """γ̂ visto pela fase de dados, que mira só o cluster dominante"""
        return self.dominant_fraction * self.gamma_hat

    @property
    def data_sigma_e2(self):
        return self.dominant_fraction * self.sigma_e2

    @property
    def u0_measure(self):
        """|U_0| = |U_t0|·|U_r0| em rad²"""
        return self.ut0.measure() * self.ur0.measure()

    @property
    def noise_power(self):
        """N0·W_tot"""
        return self.noise_psd * self.bandwidth


def path_loss_value(wavelength, distance, exponent=2.0):
    """ℓ(d) = (4πd/λ)^α (Friis com expoente configurável)"""
    if distance <= 0 or wavelength <= 0:
        raise DomainError("Distância e comprimento de onda devem ser positivos")
    return (4.0 * math.pi * distance / wavelength) ** exponent


def path_loss(params):
    return path_loss_value(params.wavelength_m, params.distance_m, params.path_loss_exponent)


def sectored_gain(beam, theta):
    """G = (2π/|B|)·χ_B(θ)"""
    medida = beam.measure()
    if medida <= 0:
        raise DomainError("Feixe vazio não tem ganho setorizado")
    return 2.0 * math.pi / medida if beam.contains(theta) else 0.0


def beamforming_factor(power, beam_t_measure, beam_r_measure, params):
    """ν = (2π)² P / (N0 W_tot |B_t||B_r|)"""
    return (2.0 * math.pi) ** 2 * power / (params.noise_power * beam_t_measure * beam_r_measure)


def snr(power, beam_t, beam_r, theta_t, theta_r, gamma, params):
    """SNR = ν γ χ_{B_t}(θ_t) χ_{B_r}(θ_r)"""
    if not (beam_t.contains(theta_t) and beam_r.contains(theta_r)):
        return 0.0
    return beamforming_factor(power, beam_t.measure(), beam_r.measure(), params) * gamma


def channel_snr(power, beam_t, beam_r, channel, params):
    """
    SNR recebida com o canal sorteado no quadro.

    Com um cluster é `snr` no AoD/AoA sorteado; com K = 2 os clusters
    dentro do feixe somam-se coerentemente.
    """
    if len(channel.fractions) == 1:
        return snr(power, beam_t, beam_r, channel.theta_t[0], channel.theta_r[0], channel.gamma, params)
    nu = beamforming_factor(power, beam_t.measure(), beam_r.measure(), params)
    return nu * channel.captured_gain(beam_t, beam_r)


@dataclass(frozen=True)
class ChannelDraw:
    """Realização do canal num quadro (h e θ fixos durante o quadro)"""

    theta_t: tuple
    theta_r: tuple
    h: complex
    gamma_hat: float
    fractions: tuple = (1.0,)
    phases: tuple = (0.0,)

    @property
    def gamma(self):
        return abs(self.h) ** 2

    def in_beam(self, beam_t, beam_r):
        """Índices dos clusters dentro do feixe 2D"""
        return [
            c for c in range(len(self.fractions))
            if beam_t.contains(self.theta_t[c]) and beam_r.contains(self.theta_r[c])
        ]

    def aligned_fraction(self, beam_t, beam_r):
        """Fração da energia do canal capturada pelo feixe"""
        return math.fsum(self.fractions[c] for c in self.in_beam(beam_t, beam_r))

    def beacon_amplitude(self, beam_t, beam_r):
        """Soma das contribuições complexas dos clusters dentro do feixe"""
        return sum(
            (math.sqrt(self.fractions[c]) * self.h * cmath.exp(1j * self.phases[c])
             for c in self.in_beam(beam_t, beam_r)),
            0j,
        )

    def captured_gain(self, beam_t, beam_r):
        """|Σ √f_c h e^{jφ_c}|² sobre os clusters dentro do feixe"""
        return abs(self.beacon_amplitude(beam_t, beam_r)) ** 2


def draw_channel(params, prior_t, prior_r, rng):
    """
    Sorteia θ_t ~ f_t, θ_r ~ f_r (independentes) e h com h|ĥ ~ CN(ĥ, σ_e²).

    Com K=2 um segundo par AoD/AoA independente recebe a fração ϱ da
    energia; as fases dos clusters são independentes e uniformes.
    """
    k = params.clusters
    theta_t = tuple(prior_t.sample(rng) for _ in range(k))
    theta_r = tuple(prior_r.sample(rng) for _ in range(k))

    h_hat = 0j
    if params.gamma_hat > 0:
        h_hat = math.sqrt(params.gamma_hat) * cmath.exp(2j * math.pi * rng.random())
    sigma2 = params.sigma_e2
    erro = 0j
    if sigma2 > 0:
        erro = complex(rng.standard_normal(), rng.standard_normal()) * math.sqrt(sigma2 / 2.0)

    if k == 2:
        fractions = (1.0 - params.weak_cluster_fraction, params.weak_cluster_fraction)
        phases = (0.0, 2.0 * math.pi * rng.random())
    else:
        fractions = (1.0,)
        phases = (0.0,)

    return ChannelDraw(
        theta_t=theta_t,
        theta_r=theta_r,
        h=h_hat + erro,
        gamma_hat=abs(h_hat) ** 2,
        fractions=fractions,
        phases=phases,
    )
