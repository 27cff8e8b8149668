"""Channel generation, norm-bounded uncertainty, and the robust design matrices.

All power quantities are linear. dB conversion lives in the harness/CLI.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .hermitian import hermitian_solve

__all__ = ['UncertaintyModel', 'SystemConfig', 'ChannelSet', 'RobustMatrices',
           'db_to_linear', 'crandn', 'sample_ball', 'sample_sphere',
           'sample_channels', 'sample_multiuser_channels', 'worst_case_margin',
           'default_regularization', 'build_robust_matrices']

BALL_SLACK = 1e-12


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


@dataclass(frozen=True)
class UncertaintyModel:
    """Norm-bounded error model: ``||h - h0|| <= sigma * sqrt(e)``."""
    e: float
    sigma: float = 1.0
    sigma_prime: float = 1.0

    def __post_init__(self):
        if not self.e >= 0:
            raise ValidationError(f"e must be >= 0, got {self.e}")
        if not (self.sigma > 0 and self.sigma_prime > 0):
            raise ValidationError("sigma and sigma_prime must be > 0")

    @property
    def radius_tx(self):
        return self.sigma * np.sqrt(self.e)

    @property
    def radius_rx(self):
        return self.sigma_prime * np.sqrt(self.e)


@dataclass(frozen=True)
class SystemConfig:
    """Link parameters, linear scale.

    ``p_su``/``p_pu`` are the secondary and primary symbol powers,
    ``i_limit`` the interference cap at the primary receiver and
    ``i_prime`` the cap on interference between secondary users.
    """
    nt: int
    nr: int
    p_su: float
    p_pu: float
    noise_power: float
    i_limit: float
    n_sec: int = 1
    i_prime: float = 1.0

    def __post_init__(self):
        if self.nt < 1 or self.nr < 1 or self.n_sec < 1:
            raise ValidationError("nt, nr and n_sec must be positive integers")
        for name in ('p_su', 'p_pu', 'noise_power', 'i_limit', 'i_prime'):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Nominal and true channels of one secondary link.

    ``H_s`` is the perfectly known SU link (nr x nt), ``h0`` the nominal
    SU-TX to PU-RX channel (nt), ``h0_prime`` the nominal PU-TX to SU-RX
    channel (nr). The ``*_true`` members are one realization inside the
    error balls.
    """
    H_s: np.ndarray
    h0: np.ndarray
    h0_prime: np.ndarray
    h_true: np.ndarray
    h_prime_true: np.ndarray
    uncertainty: UncertaintyModel

    def __post_init__(self):
        nr, nt = np.shape(self.H_s)
        if np.shape(self.h0) != (nt,) or np.shape(self.h_true) != (nt,):
            raise ValidationError("h0 and h_true must have length nt")
        if np.shape(self.h0_prime) != (nr,) or np.shape(self.h_prime_true) != (nr,):
            raise ValidationError("h0_prime and h_prime_true must have length nr")
        u = self.uncertainty
        if np.linalg.norm(self.h_true - self.h0) > u.radius_tx + BALL_SLACK * max(1.0, u.radius_tx):
            raise ValidationError("h_true lies outside the uncertainty ball")
        if np.linalg.norm(self.h_prime_true - self.h0_prime) > u.radius_rx + BALL_SLACK * max(1.0, u.radius_rx):
            raise ValidationError("h_prime_true lies outside the uncertainty ball")

    @property
    def nt(self):
        return self.H_s.shape[1]

    @property
    def nr(self):
        return self.H_s.shape[0]


@dataclass(frozen=True, eq=False)
class RobustMatrices:
    """Matrices of the robust single-user problem.

    ``A = p_su H^H D^-1 H``, ``B = h0 h0^H + margin_tx I`` and
    ``D = p_pu h0' h0'^H + (p_pu margin_rx + noise) I``. ``H_s`` is kept
    because the receive beamformer needs it.
    """
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    H_s: np.ndarray
    margin_tx: float
    margin_rx: float


def crandn(rng, *shape):
    """Circularly-symmetric CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_sphere(rng, dim, radius=1.0, size=None):
    """Uniform points on the complex sphere of the given radius."""
    shape = (dim,) if size is None else (size, dim)
    g = crandn(rng, *shape)
    return radius * g / np.linalg.norm(g, axis=-1, keepdims=True)


def sample_ball(rng, dim, radius=1.0, size=None):
    """Uniform points in the closed complex ball of ``C^dim``.

    The ball is the real ``2*dim`` ball, so the radial law is ``U^(1/(2 dim))``.
    """
    direction = sample_sphere(rng, dim, 1.0, size)
    r = rng.random(None if size is None else (size, 1)) ** (1.0 / (2 * dim))
    return radius * r * direction


def sample_channels(cfg, u, seed):
    """Draw one ``ChannelSet``; deterministic for a given seed.

    ``seed`` may be anything ``numpy.random.default_rng`` accepts.
    """
    rng = np.random.default_rng(seed)
    H_s = crandn(rng, cfg.nr, cfg.nt)
    h0 = crandn(rng, cfg.nt)
    h0_prime = crandn(rng, cfg.nr)
    delta = sample_ball(rng, cfg.nt)
    delta_prime = sample_ball(rng, cfg.nr)
    return ChannelSet(H_s=H_s, h0=h0, h0_prime=h0_prime,
                      h_true=h0 + u.radius_tx * delta,
                      h_prime_true=h0_prime + u.radius_rx * delta_prime,
                      uncertainty=u)


def sample_multiuser_channels(cfg, u, seed):
    """Draw ``cfg.n_sec`` channel sets sharing one SU-TX to PU-RX channel."""
    rng = np.random.default_rng(seed)
    h0 = crandn(rng, cfg.nt)
    h_true = h0 + u.radius_tx * sample_ball(rng, cfg.nt)
    out = []
    for _ in range(cfg.n_sec):
        H_s = crandn(rng, cfg.nr, cfg.nt)
        h0_prime = crandn(rng, cfg.nr)
        h_prime_true = h0_prime + u.radius_rx * sample_ball(rng, cfg.nr)
        out.append(ChannelSet(H_s=H_s, h0=h0, h0_prime=h0_prime, h_true=h_true,
                              h_prime_true=h_prime_true, uncertainty=u))
    return out


def worst_case_margin(h0_norm, e, sigma):
    """Inflation ``2 sqrt(e) sigma ||h0|| + e sigma^2`` of ``h h^H`` over the ball."""
    if h0_norm < 0 or e < 0 or sigma < 0:
        raise ValidationError("worst_case_margin arguments must be >= 0")
    return 2.0 * np.sqrt(e) * sigma * h0_norm + e * sigma ** 2


def default_regularization(h0):
    """Ridge to use for ``B`` when ``e == 0``."""
    return 1e-9 * float(np.vdot(h0, h0).real)


def build_robust_matrices(cs, cfg, regularization=None):
    """Build ``A``, ``B``, ``D`` for one channel set.

    Parameters
    ----------
    cs : ChannelSet
    cfg : SystemConfig
    regularization : float, optional
        Ridge added to ``B`` when the transmit margin is zero (``e == 0``),
        where ``B`` would otherwise be rank one. Ignored when the margin is
        positive.

    Raises
    ------
    DomainError
        ``B`` would be singular and no positive regularization was given.
    """
    u = cs.uncertainty
    margin_tx = worst_case_margin(float(np.linalg.norm(cs.h0)), u.e, u.sigma)
    margin_rx = worst_case_margin(float(np.linalg.norm(cs.h0_prime)), u.e, u.sigma_prime)
    ridge = margin_tx
    if margin_tx == 0.0:
        if regularization is None or not regularization > 0:
            raise DomainError("B is singular for a zero uncertainty margin; pass a positive "
                              "regularization (e.g. default_regularization(h0))")
        ridge = float(regularization)
    B = np.outer(cs.h0, cs.h0.conj()) + ridge * np.eye(cs.nt)
    D = (cfg.p_pu * np.outer(cs.h0_prime, cs.h0_prime.conj())
         + (cfg.p_pu * margin_rx + cfg.noise_power) * np.eye(cs.nr))
    A = cfg.p_su * cs.H_s.conj().T @ hermitian_solve(D, cs.H_s)
    A = 0.5 * (A + A.conj().T)
    return RobustMatrices(A=A, B=B, D=D, H_s=np.asarray(cs.H_s, dtype=complex),
                          margin_tx=float(margin_tx), margin_rx=float(margin_rx))
