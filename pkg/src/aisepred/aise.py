"""Adaptive input and state estimation (AISE) for real-time numerical differentiation.

The measured signal is modeled as the output of a discrete integrator chain
driven by an unknown input d, so that d is the chain-order derivative of the
signal. A Kalman filter tracks the chain state; an adaptive FIR/IIR law
reconstructs d from the filter residuals; recursive least squares with
variable-rate forgetting tunes that law online; and the filter's process and
measurement noise covariances are themselves re-estimated every step from the
residual statistics. No prior knowledge of the signal's motion or of the
sensor noise level is required.

Each AiseFilter is single-writer. Instances are independent, so one filter
per signal channel can run on its own thread; a filter can be checkpointed to
JSON and restored with bit-identical continuation.
"""

import json
from collections import deque
from dataclasses import dataclass
from itertools import islice

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import betaincinv

from .integrators import build_integrator

__all__ = [
    "AiseConfig",
    "AiseFilter",
    "StepDiagnostics",
    "NumericalInvariantError",
    "benchmark_config",
    "f_critical",
    "vrf_lambda",
]


class NumericalInvariantError(RuntimeError):
    """A runtime numerical invariant failed (e.g. covariance lost definiteness)."""

    def __init__(self, step, message):
        self.step = step
        super().__init__(f"step {step}: {message}")


@dataclass(frozen=True)
class AiseConfig:
    """Tuning parameters of one estimator channel.

    order selects first/second/third differentiation. n_e is the order of the
    input-reconstruction law (coefficient count 2*n_e + 1), n_f the window of
    the filtered regressors. r_z and r_d weight the residual and the input
    magnitude in the identification cost; r_theta scales the initial
    coefficient regularization and r_inf the covariance-resetting floor (both
    expanded to scalar * identity). eta_init/eta_l/eta_u bound the adapted
    process-noise level, beta interpolates between the smallest and largest
    admissible residual-variance surplus, and (tau_n, tau_d, alpha_vrf) set
    the variance-ratio test that lowers the forgetting factor after a change.
    """

    order: int = 1
    t_s: float = 0.01
    n_e: int = 25
    n_f: int = 50
    r_z: float = 1.0
    r_d: float = 0.1
    r_theta: float = 10.0**-3.5
    r_inf: float = 1e-4
    eta_init: float = 0.002
    eta_l: float = 1e-6
    eta_u: float = 0.1
    beta: float = 0.55
    tau_n: int = 5
    tau_d: int = 25
    alpha_vrf: float = 0.002
    eta_grid_points: int = 50
    adapt_start: int | None = None
    eta_rule: str = "interpolated"

    def __post_init__(self):
        if self.order not in (1, 2, 3):
            raise ValueError(f"order must be 1, 2, or 3, got {self.order!r}")
        if self.t_s <= 0:
            raise ValueError("t_s must be positive")
        if self.n_e < 1 or self.n_f < 1:
            raise ValueError("n_e and n_f must be >= 1")
        for name in ("r_z", "r_d", "r_theta", "r_inf"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.eta_l <= self.eta_u:
            raise ValueError("need 0 < eta_l <= eta_u (log-spaced search grid)")
        if not self.eta_l <= self.eta_init <= self.eta_u:
            raise ValueError("eta_init must lie in [eta_l, eta_u]")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must be in [0, 1]")
        if self.tau_n < 2 or self.tau_d <= self.tau_n:
            raise ValueError("need tau_n >= 2 and tau_d > tau_n")
        if self.alpha_vrf < 0:
            raise ValueError("alpha_vrf must be >= 0")
        if self.eta_grid_points < 2:
            raise ValueError("eta_grid_points must be >= 2")
        if self.adapt_start is not None and self.adapt_start < 1:
            raise ValueError("adapt_start must be >= 1")
        if self.eta_rule not in ("interpolated", "floor", "scaled"):
            raise ValueError(
                f"eta_rule must be 'interpolated', 'floor', or 'scaled', got {self.eta_rule!r}"
            )

    @property
    def l_theta(self):
        return 2 * self.n_e + 1


def benchmark_config(order, t_s=0.01):
    """Parameter set used by the benchmark scenarios for the given order.

    The identification weights, window lengths, noise bounds, and forgetting
    parameters follow the benchmark tuning shared by all three orders. The
    coefficient regularization and the noise-level selection variant are set
    per order for loop stability: lower orders run the floor variant with
    moderate regularization, while the third-derivative channel needs the
    residual-scaled variant and the strongest regularization to keep its
    much more weakly excited identification anchored.
    """
    if order == 1:
        return AiseConfig(order=1, t_s=t_s, r_theta=1e-2, eta_rule="floor")
    if order == 2:
        return AiseConfig(order=2, t_s=t_s, r_theta=3e-1, eta_rule="floor")
    return AiseConfig(order=3, t_s=t_s, r_theta=1e-1, beta=0.5, eta_rule="scaled")


@dataclass
class StepDiagnostics:
    """Internal quantities of the most recent step, for logging and tests."""

    k: int
    z: float
    d_hat: float
    phi: np.ndarray
    phi_f: np.ndarray
    dhat_f: float
    lam: float
    eta: float
    v2: float
    s_hat: float | None
    forecast_var: float | None


def f_critical(dfn, dfd, quantile=0.99):
    """Upper quantile of the F distribution via the regularized incomplete beta inverse."""
    w = betaincinv(0.5 * dfn, 0.5 * dfd, quantile)
    return dfd * w / (dfn * (1.0 - w))


def vrf_lambda(z_history, tau_n, tau_d, alpha_vrf, f_crit=None):
    """Forgetting factor from a one-sided variance-ratio test on the residuals.

    Compares the sample variance over the last tau_n residuals against the
    last tau_d. If the ratio exceeds the 0.99 F quantile with (tau_n - 1,
    tau_d - 1) degrees of freedom, the factor drops below one,
    lambda = 1 / (1 + alpha_vrf * (F - F_crit)); otherwise it stays at one.
    Fewer than tau_d residuals, or a zero denominator variance, mean no
    evidence of change and return 1.
    """
    z = np.asarray(z_history, dtype=float)
    if len(z) < tau_d:
        return 1.0
    var_n = float(np.var(z[-tau_n:], ddof=1))
    var_d = float(np.var(z[-tau_d:], ddof=1))
    if var_d <= 0.0:
        return 1.0
    ratio = var_n / var_d
    if f_crit is None:
        f_crit = f_critical(tau_n - 1, tau_d - 1)
    if ratio > f_crit:
        return 1.0 / (1.0 + alpha_vrf * (ratio - f_crit))
    return 1.0


class AiseFilter:
    """Single-channel derivative estimator; feed one measurement per step.

    step(y) returns the current estimate of the configured derivative of the
    measurement stream. All history buffers are zero-initialized, so the
    filter is well defined from the first sample.
    """

    def __init__(self, config=None, **overrides):
        if config is None:
            config = AiseConfig(**overrides)
        elif overrides:
            raise ValueError("pass either a config object or keyword overrides, not both")
        self.cfg = config
        self.model = build_integrator(config.order, config.t_s)
        self.adapt_start = config.adapt_start if config.adapt_start is not None else config.n_f
        self._f_crit = f_critical(config.tau_n - 1, config.tau_d - 1)
        self._eta_grid = np.logspace(
            np.log10(config.eta_l), np.log10(config.eta_u), config.eta_grid_points
        )
        self._r_inf_mat = config.r_inf * np.eye(config.l_theta)
        self.reset()

    # ------------------------------------------------------------------
    # State management
    # ------------------------------------------------------------------

    def reset(self):
        cfg = self.cfg
        n, lt = self.model.n, cfg.l_theta
        self.k = 0
        self.theta = np.zeros(lt)
        # RLS covariance kept in information form; P_rls is its inverse.
        self.p_inv = cfg.r_theta * np.eye(lt)
        self.x_fc = np.zeros(n)
        self.x_da = np.zeros(n)
        self.P_fc = np.zeros((n, n))
        self.P_da = np.zeros((n, n))
        n_dhat = cfg.n_e + cfg.n_f
        n_z = max(cfg.n_e + cfg.n_f, cfg.tau_d)
        self.dhat_hist = deque([0.0] * n_dhat, maxlen=n_dhat)   # newest first
        self.z_hist = deque([0.0] * n_z, maxlen=n_z)            # newest first
        self.phi_hist = np.zeros((cfg.n_f, lt))                 # row i = phi at step k-1-i
        # Row j holds the product of the last j+1 closed-loop matrices, newest
        # leftmost; row j feeds the filter weight at lag j+2. Zero rows encode
        # missing history.
        self.prodstack = np.zeros((cfg.n_f - 1, n, n))
        self._res_count = 0
        self._res_mean = 0.0
        self._res_m2 = 0.0
        self.eta_k = cfg.eta_init
        self.v2_k = 1.0
        self.lambda_k = 1.0
        self.last = None

    @property
    def P_rls(self):
        """RLS coefficient covariance (inverse of the stored information matrix)."""
        c, lower = cho_factor(self.p_inv, lower=True)
        return cho_solve((c, lower), np.eye(self.cfg.l_theta))

    def residual_variance(self):
        """Sample variance of all residuals seen so far (None before step 1)."""
        if self._res_count < 2:
            return None
        return self._res_m2 / (self._res_count - 1)

    # ------------------------------------------------------------------
    # Individual operations (composed by step)
    # ------------------------------------------------------------------

    def _build_phi(self):
        cfg = self.cfg
        phi = np.empty(cfg.l_theta)
        phi[: cfg.n_e] = list(islice(self.dhat_hist, cfg.n_e))
        phi[cfg.n_e :] = list(islice(self.z_hist, cfg.n_e + 1))
        return phi

    def estimate_input(self):
        """Current input estimate: regressor of past estimates and residuals times theta."""
        return float(self._build_phi() @ self.theta)

    def forecast(self, d_hat, y):
        """One forecast cycle: (next forecast state, forecast output, residual).

        Pure; step() applies the same expressions at the appropriate points of
        its cycle (residual first, state advance last).
        """
        y_fc = float(self.x_fc[0])
        z = y_fc - float(y)
        x_next = self.model.A @ self.x_da + self.model.B * float(d_hat)
        return x_next, y_fc, z

    def _filter_weights(self):
        """Impulse-response weights of the residual-to-input closed loop, lags 1..n_f."""
        H = np.empty(self.cfg.n_f)
        H[0] = self.model.B[0] if self.k >= 1 else 0.0
        H[1:] = self.prodstack[:, 0, :] @ self.model.B
        return H

    def filter_regressor(self):
        """Filtered regressor row and filtered input estimate over the last n_f steps."""
        cfg = self.cfg
        H = self._filter_weights()
        phi_f = H @ self.phi_hist
        recent = np.fromiter(islice(self.dhat_hist, cfg.n_f), float, cfg.n_f)
        dhat_f = float(H @ recent)
        return phi_f, dhat_f

    def _factor_information(self, p_inv):
        """Cholesky of the information matrix, tolerating roundoff-scale asymmetry.

        Exact arithmetic keeps the matrix positive definite (it is a sum of a
        scaled positive-definite matrix and outer products), so a failed
        factorization at machine-precision scale is retried once with an
        epsilon-sized diagonal lift. A failure beyond that scale is a genuine
        invariant violation and raises.
        """
        try:
            return cho_factor(p_inv, lower=True), p_inv
        except LinAlgError:
            pass
        lift = 1e-12 * float(np.max(np.diag(p_inv)))
        if lift <= 0:
            raise NumericalInvariantError(
                self.k, "RLS information matrix lost positive definiteness"
            )
        lifted = p_inv + lift * np.eye(len(p_inv))
        try:
            return cho_factor(lifted, lower=True), lifted
        except LinAlgError:
            raise NumericalInvariantError(
                self.k, "RLS information matrix lost positive definiteness"
            ) from None

    def rls_update(self, lam, phi, phi_f, z, dhat_f):
        """Forgetting/resetting RLS step on the information matrix and coefficients."""
        cfg = self.cfg
        p_inv_new = lam * self.p_inv if lam != 1.0 else self.p_inv.copy()
        if lam != 1.0:
            p_inv_new += (1.0 - lam) * self._r_inf_mat
        p_inv_new += cfg.r_z * np.outer(phi_f, phi_f)
        p_inv_new += cfg.r_d * np.outer(phi, phi)
        p_inv_new = 0.5 * (p_inv_new + p_inv_new.T)
        rhs = cfg.r_z * (z - dhat_f + float(phi_f @ self.theta)) * phi_f
        rhs += cfg.r_d * float(phi @ self.theta) * phi
        factor, p_inv_new = self._factor_information(p_inv_new)
        self.theta = self.theta - cho_solve(factor, rhs)
        self.p_inv = p_inv_new

    def adapt_noise_covariances(self):
        """Choose the process-noise level and residual-noise variance for this step.

        Before the warmup horizon the configured initial level is used with
        the running residual variance (1.0 until that exists). Afterwards the
        residual-variance surplus is evaluated on a log-spaced grid of
        candidate levels. Any grid point with a positive surplus, paired with
        that surplus as the measurement-noise variance, reproduces the
        empirical residual variance exactly, so all of them minimize the
        matching cost; the eta_rule setting picks which one is returned:

        * "interpolated": the level whose surplus is nearest the
          beta-interpolated target between the smallest and largest positive
          surplus. This parks the assimilation gain at a roughly
          beta-sized value, which smooths the state estimate but starves the
          input estimator of leverage on gentle trajectories.
        * "floor": the smallest level with a positive surplus. This pushes
          the assimilation gain as low as the matching allows, giving the
          input estimator the long residual memory it needs to track.
        * "scaled": the admissible level nearest t_s^2 times the residual
          variance (the input-to-state injection gain squared), which holds
          the assimilation gain in a narrow band across residual scales;
          the weakly excited third-derivative channel needs this anchoring.

        If no grid point has a positive surplus, the level with the smallest
        absolute surplus is chosen with zero measurement noise.
        """
        if self.k < self.adapt_start:
            s_hat = self.residual_variance()
            return self.cfg.eta_init, (s_hat if s_hat is not None else 1.0)
        a_row = self.model.A[0, :]
        forecast_var = float(a_row @ self.P_da @ a_row)
        s_hat = self._res_m2 / (self._res_count - 1)
        surplus = s_hat - forecast_var - self._eta_grid
        positive = surplus > 0.0
        if positive.any():
            if self.cfg.eta_rule == "floor":
                idx = int(np.argmax(positive))
            elif self.cfg.eta_rule == "scaled":
                anchor = min(max(self.cfg.t_s**2 * s_hat, self.cfg.eta_l), self.cfg.eta_u)
                cand = np.flatnonzero(positive)
                offset = np.abs(np.log(self._eta_grid[cand]) - np.log(anchor))
                idx = int(cand[np.argmin(offset)])
            else:
                pos_vals = surplus[positive]
                target = self.cfg.beta * pos_vals.min() + (1.0 - self.cfg.beta) * pos_vals.max()
                idx = int(np.argmin(np.abs(surplus - target)))
            return float(self._eta_grid[idx]), float(surplus[idx])
        idx = int(np.argmin(np.abs(surplus)))
        return float(self._eta_grid[idx]), 0.0

    def data_assimilate(self, z, eta, v2):
        """Measurement update and forecast-covariance propagation.

        Returns (x_da, K_da, P_da, next P_fc) and advances the stored
        covariances and the closed-loop product stack.
        """
        A = self.model.A
        innov_var = self.P_fc[0, 0] + v2
        if innov_var <= 0.0:
            raise NumericalInvariantError(self.k, "innovation variance not positive")
        gain = -self.P_fc[:, 0] / innov_var
        self.x_da = self.x_fc + gain * z
        P_da = self.P_fc + np.outer(gain, self.P_fc[0, :])
        self.P_da = 0.5 * (P_da + P_da.T)
        if self.k >= 1:
            # Closed-loop matrix A(I + K C): A with its first column shifted by A @ K.
            abar = A.copy()
            abar[:, 0] += A @ gain
            stack = self.prodstack
            new_stack = np.empty_like(stack)
            new_stack[0] = abar
            if len(stack) > 1:
                new_stack[1:] = abar @ stack[:-1]
            self.prodstack = new_stack
        P_fc = A @ self.P_da @ A.T
        P_fc[np.diag_indices_from(P_fc)] += eta
        self.P_fc = 0.5 * (P_fc + P_fc.T)
        return self.x_da, gain, self.P_da, self.P_fc

    # ------------------------------------------------------------------
    # Main cycle
    # ------------------------------------------------------------------

    def step(self, y):
        """Process one measurement; returns the derivative estimate for this step."""
        cfg = self.cfg
        y = float(y)
        z = float(self.x_fc[0]) - y

        # Running residual statistics over every step so far.
        self._res_count += 1
        delta = z - self._res_mean
        self._res_mean += delta / self._res_count
        self._res_m2 += delta * (z - self._res_mean)
        self.z_hist.appendleft(z)

        phi = self._build_phi()
        d_hat = float(phi @ self.theta)
        phi_f, dhat_f = self.filter_regressor()

        if self.k < cfg.tau_d:
            lam = 1.0
        else:
            recent = np.fromiter(islice(self.z_hist, cfg.tau_d), float, cfg.tau_d)
            lam = vrf_lambda(recent[::-1], cfg.tau_n, cfg.tau_d, cfg.alpha_vrf, self._f_crit)

        self.rls_update(lam, phi, phi_f, z, dhat_f)

        eta, v2 = self.adapt_noise_covariances()
        if self.k >= self.adapt_start:
            a_row = self.model.A[0, :]
            forecast_var = float(a_row @ self.P_da @ a_row)
            s_hat = self._res_m2 / (self._res_count - 1)
        else:
            forecast_var = None
            s_hat = self.residual_variance()
        self.eta_k, self.v2_k = eta, v2

        self.data_assimilate(z, eta, v2)
        self.x_fc = self.model.A @ self.x_da + self.model.B * d_hat

        self.dhat_hist.appendleft(d_hat)
        self.phi_hist = np.roll(self.phi_hist, 1, axis=0)
        self.phi_hist[0] = phi

        self.lambda_k = lam
        self.last = StepDiagnostics(
            k=self.k, z=z, d_hat=d_hat, phi=phi, phi_f=phi_f, dhat_f=dhat_f,
            lam=lam, eta=eta, v2=v2, s_hat=s_hat, forecast_var=forecast_var,
        )
        self.k += 1
        return d_hat

    def run(self, ys):
        """Convenience: step through a whole array, returning all estimates."""
        return np.array([self.step(y) for y in np.asarray(ys, dtype=float)])

    # ------------------------------------------------------------------
    # Checkpoint / restore
    # ------------------------------------------------------------------

    def to_json(self):
        """Serialize config and full state; restoring continues bit-identically."""
        cfg = self.cfg
        state = {
            "config": {
                "order": cfg.order, "t_s": cfg.t_s, "n_e": cfg.n_e, "n_f": cfg.n_f,
                "r_z": cfg.r_z, "r_d": cfg.r_d, "r_theta": cfg.r_theta, "r_inf": cfg.r_inf,
                "eta_init": cfg.eta_init, "eta_l": cfg.eta_l, "eta_u": cfg.eta_u,
                "beta": cfg.beta, "tau_n": cfg.tau_n, "tau_d": cfg.tau_d,
                "alpha_vrf": cfg.alpha_vrf, "eta_grid_points": cfg.eta_grid_points,
                "adapt_start": cfg.adapt_start, "eta_rule": cfg.eta_rule,
            },
            "k": self.k,
            "theta": self.theta.tolist(),
            "p_inv": self.p_inv.tolist(),
            "x_fc": self.x_fc.tolist(),
            "x_da": self.x_da.tolist(),
            "P_fc": self.P_fc.tolist(),
            "P_da": self.P_da.tolist(),
            "dhat_hist": list(self.dhat_hist),
            "z_hist": list(self.z_hist),
            "phi_hist": self.phi_hist.tolist(),
            "prodstack": self.prodstack.tolist(),
            "res_count": self._res_count,
            "res_mean": self._res_mean,
            "res_m2": self._res_m2,
            "eta_k": self.eta_k,
            "v2_k": self.v2_k,
            "lambda_k": self.lambda_k,
        }
        return json.dumps(state)

    @classmethod
    def from_json(cls, payload):
        state = json.loads(payload)
        filt = cls(AiseConfig(**state["config"]))
        filt.k = state["k"]
        filt.theta = np.asarray(state["theta"])
        filt.p_inv = np.asarray(state["p_inv"])
        filt.x_fc = np.asarray(state["x_fc"])
        filt.x_da = np.asarray(state["x_da"])
        filt.P_fc = np.asarray(state["P_fc"])
        filt.P_da = np.asarray(state["P_da"])
        filt.dhat_hist = deque(state["dhat_hist"], maxlen=filt.dhat_hist.maxlen)
        filt.z_hist = deque(state["z_hist"], maxlen=filt.z_hist.maxlen)
        filt.phi_hist = np.asarray(state["phi_hist"])
        filt.prodstack = np.asarray(state["prodstack"])
        filt._res_count = state["res_count"]
        filt._res_mean = state["res_mean"]
        filt._res_m2 = state["res_m2"]
        filt.eta_k = state["eta_k"]
        filt.v2_k = state["v2_k"]
        filt.lambda_k = state["lambda_k"]
        return filt
