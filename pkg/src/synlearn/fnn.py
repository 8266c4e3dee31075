"""Single-hidden-layer feedforward networks with derivative penalties.

Forward map g(x) = w_out * act(w_in x + b_in) + b_out, its input Jacobian,
a regularized least-squares loss whose penalty is the summed squared
Jacobian norm (minus a residual-weighted curvature term when requested),
a data-driven estimate of the penalty weight, full-batch gradient descent
with analytic gradients, and a one-shot pseudoinverse trainer for the
output layer.
"""

from dataclasses import dataclass, replace

import numpy as np

from .seeding import derive_rng

_ACTIVATIONS = ("tanh", "sigmoid", "identity")


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class SlfnModel:
    """Network parameters plus the assumed observation noise level."""

    w_in: np.ndarray   # (H, d)
    b_in: np.ndarray   # (H,)
    w_out: np.ndarray  # (m, H)
    b_out: np.ndarray  # (m,)
    activation: str = "tanh"
    noise_sigma: float = 1.0

    def __post_init__(self):
        w_in = np.atleast_2d(np.asarray(self.w_in, dtype=float))
        b_in = np.asarray(self.b_in, dtype=float).reshape(-1)
        w_out = np.atleast_2d(np.asarray(self.w_out, dtype=float))
        b_out = np.asarray(self.b_out, dtype=float).reshape(-1)
        for name, arr in (("w_in", w_in), ("b_in", b_in), ("w_out", w_out), ("b_out", b_out)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, arr)
        hidden, _ = w_in.shape
        if hidden < 1:
            raise ValueError("need at least one hidden unit")
        if b_in.shape != (hidden,):
            raise ValueError(f"b_in shape {b_in.shape} != ({hidden},)")
        if w_out.shape[1] != hidden:
            raise ValueError(f"w_out has {w_out.shape[1]} columns, expected {hidden}")
        if b_out.shape != (w_out.shape[0],):
            raise ValueError(f"b_out shape {b_out.shape} != ({w_out.shape[0]},)")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}, choose from {_ACTIVATIONS}")
        if not (np.isfinite(self.noise_sigma) and self.noise_sigma > 0):
            raise ValueError(f"noise_sigma must be > 0, got {self.noise_sigma}")

    @property
    def input_dim(self) -> int:
        return self.w_in.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.w_in.shape[0]

    @property
    def output_dim(self) -> int:
        return self.w_out.shape[0]


@dataclass(frozen=True)
class SupervisedSet:
    """Paired inputs (N, d) and targets (N, m)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if not np.all(np.isfinite(inputs)) or not np.all(np.isfinite(targets)):
            raise ValueError("inputs and targets must be finite")
        if inputs.shape[0] != targets.shape[0]:
            raise ValueError(
                f"inputs have {inputs.shape[0]} rows, targets have {targets.shape[0]}"
            )
        if inputs.shape[0] < 1:
            raise ValueError("need at least one sample")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]


@dataclass(frozen=True)
class LossBreakdown:
    """Loss split into its raw sums; total = (sse + h*jac - h*hess) / (2 N sigma^2)."""

    sse_term: float
    jacobian_term: float
    hessian_term: float
    total: float
    h_used: float


@dataclass(frozen=True)
class TrainResult:
    model: SlfnModel
    loss_trace: np.ndarray
    h_trace: np.ndarray


def _act_derivs(name: str, pre: np.ndarray):
    """Activation value with first and second derivatives at ``pre``."""
    if name == "tanh":
        a = np.tanh(pre)
        da = 1.0 - a**2
        return a, da, -2.0 * a * da
    if name == "sigmoid":
        a = 1.0 / (1.0 + np.exp(-pre))
        da = a * (1.0 - a)
        return a, da, da * (1.0 - 2.0 * a)
    if name == "identity":
        return pre, np.ones_like(pre), np.zeros_like(pre)
    raise ValueError(f"unknown activation {name!r}, choose from {_ACTIVATIONS}")


def _forward_batch(model: SlfnModel, inputs: np.ndarray) -> np.ndarray:
    pre = inputs @ model.w_in.T + model.b_in
    act, _, _ = _act_derivs(model.activation, pre)
    return act @ model.w_out.T + model.b_out


def forward(model: SlfnModel, x) -> np.ndarray:
    """Evaluate the network at one input vector (d,) or a batch (N, d)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if x.shape[0] != model.input_dim:
            raise ValueError(f"input has dimension {x.shape[0]}, model expects {model.input_dim}")
        return _forward_batch(model, x[None, :])[0]
    if x.shape[1] != model.input_dim:
        raise ValueError(f"input has dimension {x.shape[1]}, model expects {model.input_dim}")
    return _forward_batch(model, x)


def input_jacobian(model: SlfnModel, x) -> np.ndarray:
    """Jacobian dg/dx at one point: (m, d) matrix w_out diag(act') w_in."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.input_dim:
        raise ValueError(f"input has dimension {x.shape[0]}, model expects {model.input_dim}")
    pre = model.w_in @ x + model.b_in
    _, da, _ = _act_derivs(model.activation, pre)
    return model.w_out @ (da[:, None] * model.w_in)


def _jacobian_norm_sum(model: SlfnModel, slopes: np.ndarray) -> float:
    """sum_i ||J(x_i)||_F^2 via sum over (G * Q * S^T S) with G = w_out^T w_out,
    Q = w_in w_in^T and S the (N, H) matrix of activation slopes."""
    gram_out = model.w_out.T @ model.w_out
    gram_in = model.w_in @ model.w_in.T
    return float(np.sum((slopes.T @ slopes) * gram_out * gram_in))


def _fd_hessian_contraction(model: SlfnModel, x: np.ndarray, residual: np.ndarray) -> float:
    """Frobenius norm of sum_k residual_k * d^2 g_k / dx dx, by central differences."""
    d = x.shape[0]
    step = 1e-4 * (1.0 + np.abs(x))
    base = forward(model, x)
    contracted = np.empty((d, d))
    plus = np.empty((d, model.output_dim))
    minus = np.empty((d, model.output_dim))
    for a in range(d):
        e = np.zeros(d)
        e[a] = step[a]
        plus[a] = forward(model, x + e)
        minus[a] = forward(model, x - e)
        contracted[a, a] = residual @ (plus[a] - 2.0 * base + minus[a]) / step[a] ** 2
    for a in range(d):
        ea = np.zeros(d)
        ea[a] = step[a]
        for b in range(a + 1, d):
            eb = np.zeros(d)
            eb[b] = step[b]
            mixed = (
                forward(model, x + ea + eb)
                - forward(model, x + ea - eb)
                - forward(model, x - ea + eb)
                + forward(model, x - ea - eb)
            ) / (4.0 * step[a] * step[b])
            contracted[a, b] = residual @ mixed
            contracted[b, a] = contracted[a, b]
    return float(np.linalg.norm(contracted, "fro"))


def loss_regularized(
    model: SlfnModel, data: SupervisedSet, h: float, include_hessian: bool = False
) -> LossBreakdown:
    """Penalized least-squares objective.

    sse_term      = sum_i ||z_i - g(x_i)||^2
    jacobian_term = sum_i ||dg/dx(x_i)||_F^2
    hessian_term  = sum_i ||sum_k (z_i - g(x_i))_k d^2 g_k/dx dx (x_i)||_F
                    (finite differences; 0.0 unless include_hessian)
    total         = (sse + h*jac - h*hess) / (2 N sigma^2)

    The curvature term enters with a minus sign and is reported for
    diagnostics only; no trainer uses it.
    """
    if not (np.isfinite(h) and h >= 0):
        raise ValueError(f"h must be >= 0, got {h}")
    _check_shapes(model, data)
    pre = data.inputs @ model.w_in.T + model.b_in
    act, slopes, _ = _act_derivs(model.activation, pre)
    pred = act @ model.w_out.T + model.b_out
    resid = data.targets - pred
    sse = float(np.sum(resid**2))
    jac = _jacobian_norm_sum(model, slopes)
    hess = 0.0
    if include_hessian:
        for i in range(data.n):
            hess += _fd_hessian_contraction(model, data.inputs[i], resid[i])
    total = (sse + h * jac - h * hess) / (2.0 * data.n * model.noise_sigma**2)
    return LossBreakdown(sse, jac, hess, total, h)


def estimate_reg_param(
    model: SlfnModel, data: SupervisedSet, prefactor: float | None = None
) -> float:
    """Data-driven penalty weight

        h = d^2 (1 + (d-1)^2) * SSE / sum_i ||dg/dx(x_i)||_F^2

    with d the input dimension. The dimensional prefactor can be overridden.
    Zero SSE gives exactly 0; a zero Jacobian sum with nonzero SSE is an error.
    """
    _check_shapes(model, data)
    pre = data.inputs @ model.w_in.T + model.b_in
    act, slopes, _ = _act_derivs(model.activation, pre)
    pred = act @ model.w_out.T + model.b_out
    sse = float(np.sum((data.targets - pred) ** 2))
    if sse == 0.0:
        return 0.0
    jac = _jacobian_norm_sum(model, slopes)
    if jac <= 0.0:
        raise ValueError("summed Jacobian norm is zero: penalty weight undefined")
    d = model.input_dim
    pref = float(d**2 * (1 + (d - 1) ** 2)) if prefactor is None else float(prefactor)
    return pref * sse / jac


def _check_shapes(model: SlfnModel, data: SupervisedSet):
    if data.inputs.shape[1] != model.input_dim:
        raise ValueError(
            f"inputs have dimension {data.inputs.shape[1]}, model expects {model.input_dim}"
        )
    if data.targets.shape[1] != model.output_dim:
        raise ValueError(
            f"targets have dimension {data.targets.shape[1]}, model produces {model.output_dim}"
        )


def _loss_and_grads(model: SlfnModel, data: SupervisedSet, h: float):
    """Unnormalized objective sse + h*jac and its analytic parameter gradients."""
    inputs, targets = data.inputs, data.targets
    pre = inputs @ model.w_in.T + model.b_in
    act, slopes, curves = _act_derivs(model.activation, pre)
    pred = act @ model.w_out.T + model.b_out
    err = pred - targets                       # (N, m)

    sse = float(np.sum(err**2))
    g_w_out = 2.0 * err.T @ act                # (m, H)
    g_b_out = 2.0 * err.sum(axis=0)
    delta = (err @ model.w_out) * slopes       # (N, H)
    g_w_in = 2.0 * delta.T @ inputs
    g_b_in = 2.0 * delta.sum(axis=0)

    gram_out = model.w_out.T @ model.w_out     # (H, H)
    gram_in = model.w_in @ model.w_in.T
    sts = slopes.T @ slopes
    jac = float(np.sum(sts * gram_out * gram_in))
    if h != 0.0:
        gq = gram_out * gram_in
        via_s = 2.0 * (slopes @ gq) * curves   # (N, H)
        g_w_in += h * (via_s.T @ inputs + 2.0 * (gram_out * sts) @ model.w_in)
        g_b_in += h * via_s.sum(axis=0)
        g_w_out += h * 2.0 * model.w_out @ (gram_in * sts)

    return sse, jac, (g_w_in, g_b_in, g_w_out, g_b_out)


def train_gd(
    model: SlfnModel,
    data: SupervisedSet,
    h: float | str = 0.0,
    lr: float = 1e-3,
    epochs: int = 100,
) -> TrainResult:
    """Full-batch gradient descent on (sse + h*jac) / (2 N sigma^2).

    ``h`` is either a fixed nonnegative weight or ``"auto"``: re-estimated
    every epoch from the current model, with a damped update
    h <- 0.5 h_prev + 0.5 h_new to suppress oscillation. The loss trace has
    one entry per epoch plus a final evaluation (epochs + 1 entries total).
    Raises DivergenceError when the loss leaves the finite range.
    """
    if lr < 0:
        raise ValueError(f"lr must be >= 0, got {lr}")
    if epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {epochs}")
    auto = isinstance(h, str)
    if auto and h != "auto":
        raise ValueError(f"h must be a number or 'auto', got {h!r}")
    if not auto and not (np.isfinite(h) and h >= 0):
        raise ValueError(f"h must be >= 0, got {h}")
    _check_shapes(model, data)

    scale = 2.0 * data.n * model.noise_sigma**2
    h_val = 0.0 if auto else float(h)
    loss_trace = np.empty(epochs + 1)
    h_trace = np.empty(epochs + 1)
    current = model
    # inf/nan propagation is the divergence detector; keep numpy quiet about it
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(epochs):
            if auto:
                h_new = estimate_reg_param(current, data)
                h_val = h_new if epoch == 0 else 0.5 * h_val + 0.5 * h_new
            sse, jac, grads = _loss_and_grads(current, data, h_val)
            loss = (sse + h_val * jac) / scale
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}")
            loss_trace[epoch] = loss
            h_trace[epoch] = h_val
            stepped = [
                getattr(current, name) - lr * g / scale
                for name, g in zip(("w_in", "b_in", "w_out", "b_out"), grads)
            ]
            if not all(np.all(np.isfinite(arr)) for arr in stepped):
                raise DivergenceError(f"non-finite parameters at epoch {epoch + 1}")
            current = replace(
                current,
                w_in=stepped[0],
                b_in=stepped[1],
                w_out=stepped[2],
                b_out=stepped[3],
            )
        sse, jac, _ = _loss_and_grads(current, data, h_val)
        final = (sse + h_val * jac) / scale
    if not np.isfinite(final):
        raise DivergenceError(f"non-finite loss at epoch {epochs}")
    loss_trace[epochs] = final
    h_trace[epochs] = h_val
    return TrainResult(current, loss_trace, h_trace)


def train_pil(
    data: SupervisedSet,
    hidden_size: int,
    h: float = 0.0,
    seed: int = 0,
    activation: str = "tanh",
    weight_scheme: str = "uniform-scaled",
    noise_sigma: float = 1.0,
) -> SlfnModel:
    """One-shot trainer: random input layer, output layer by (regularized)
    pseudoinverse of the hidden activation matrix.

    With A = act(X w_in^T + b_in) and SVD A = U S V^T, the output weights are

        w_out^T = V diag(s / (s^2 + h)) U^T Z

    which for h = 0 reduces to the minimum-norm least-squares solution.
    The output bias stays 0. Input-layer entries are drawn uniformly on
    [-1, 1] and scaled by 1/sqrt(d) ("uniform-scaled") or drawn from a
    normal with the same scale ("normal").
    """
    if hidden_size < 1:
        raise ValueError(f"hidden_size must be >= 1, got {hidden_size}")
    if not (np.isfinite(h) and h >= 0):
        raise ValueError(f"h must be >= 0, got {h}")
    n, d = data.inputs.shape
    m = data.targets.shape[1]
    rng = derive_rng(seed, "pil-init")
    scale = 1.0 / np.sqrt(d)
    if weight_scheme == "uniform-scaled":
        w_in = rng.uniform(-1.0, 1.0, (hidden_size, d)) * scale
        b_in = rng.uniform(-1.0, 1.0, hidden_size) * scale
    elif weight_scheme == "normal":
        w_in = rng.standard_normal((hidden_size, d)) * scale
        b_in = rng.standard_normal(hidden_size) * scale
    else:
        raise ValueError(f"unknown weight_scheme {weight_scheme!r}")

    act, _, _ = _act_derivs(activation, data.inputs @ w_in.T + b_in)
    u, s, vt = np.linalg.svd(act, full_matrices=False)
    if h == 0.0:
        cutoff = np.finfo(float).eps * max(n, hidden_size) * (s[0] if s.size else 0.0)
        filt = np.where(s > cutoff, np.divide(1.0, s, where=s > cutoff), 0.0)
    else:
        filt = s / (s**2 + h)
    w_out_t = vt.T @ (filt[:, None] * (u.T @ data.targets))
    return SlfnModel(
        w_in=w_in,
        b_in=b_in,
        w_out=w_out_t.T,
        b_out=np.zeros(m),
        activation=activation,
        noise_sigma=noise_sigma,
    )


def contractive_ae_loss(model: SlfnModel, inputs: np.ndarray, h: float) -> LossBreakdown:
    """Reconstruction objective: the regularized loss with targets = inputs.

    Requires output dimension equal to input dimension.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    if model.output_dim != model.input_dim:
        raise ValueError(
            f"autoencoder needs output_dim == input_dim, got "
            f"{model.output_dim} != {model.input_dim}"
        )
    return loss_regularized(model, SupervisedSet(inputs, inputs), h, include_hessian=False)
