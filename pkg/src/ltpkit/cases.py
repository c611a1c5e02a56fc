"""Benchmark grid-tied VSC systems in the complex-vector (space-vector) frame.

Two converter benchmarks are provided as model factories:

* Case system I — current-controlled VSC behind an (optionally asymmetric)
  L filter, tied through an (optionally asymmetric) grid inductance to an
  ideal grid voltage; synchronized by a q-voltage PLL.  Six states:
  converter current and conjugate, rotating-frame current-controller
  integrator and conjugate, PLL angle, PLL integrator.
* Case system II — VSC with LC filter (series-R damped capacitor), grid
  inductance, dual rotating-frame current control (negative-sequence
  reference zero), SOGI-based sequence separation feeding the PLL, and an
  outer power controller.  Eighteen states.

Both factories return closed-loop and open-loop variants.  The closed loop
is driven by the grid-voltage complex pair; the open loop is the converter
subsystem driven directly by its terminal-bus voltage, which is the model an
impedance/frequency scan linearizes.

All states are per-unit (voltage base = peak phase voltage, current base =
peak phase current, time in seconds), so solver norms and waveform
comparisons are O(1) per state.  Conjugate quantities are independent paired
states; nothing in the dynamics ever calls complex conjugation on a state,
which keeps every equation holomorphic and the analytic Jacobians exact in
the Wirtinger sense.
"""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .model import SystemModel

# amplitude-invariant Clarke transform (zero-sequence dropped) and its
# right inverse on zero-sequence-free signals
CLARKE = (2.0 / 3.0) * np.array([
    [1.0, -0.5, -0.5],
    [0.0, np.sqrt(3.0) / 2.0, -np.sqrt(3.0) / 2.0],
])
CLARKE_INV = np.array([
    [1.0, 0.0],
    [-0.5, np.sqrt(3.0) / 2.0],
    [-0.5, -np.sqrt(3.0) / 2.0],
])

# real (α, β) pair -> complex pair (v, v*) and back
T_COMPLEX = np.array([[1.0, 1j], [1.0, -1j]], dtype=complex)
T_COMPLEX_INV = 0.5 * np.array([[1.0, 1.0], [-1j, 1j]], dtype=complex)


def per_unit(value, base):
    """value/base; raises on zero/negative base."""
    if np.any(np.asarray(base) <= 0):
        raise UsageError("per-unit base must be positive")
    return value / base


def from_per_unit(value, base):
    """Inverse of :func:`per_unit`."""
    if np.any(np.asarray(base) <= 0):
        raise UsageError("per-unit base must be positive")
    return value * base


def unbalanced_grid_phasors(u_ga: complex, u_gbeta: complex):
    """abc phasors of an (α, β)-specified grid voltage.

    The models consume the αβ complex pair directly; this conversion exists
    for cross-checks against three-phase tools.
    """
    ab = np.array([u_ga, u_gbeta], dtype=complex)
    return tuple(CLARKE_INV @ ab)


def asymmetric_inductance_matrix(la: float, lb: float, lc: float) -> np.ndarray:
    """Complex-pair-frame inductance matrix of a per-phase asymmetric inductor.

    Chain abc -> αβ -> (v, v*): symmetric phases give diag(L, L); asymmetry
    couples v and v* through the conjugate off-diagonals (entry (0,1) equals
    conj of entry (1,0)).
    """
    if min(la, lb, lc) <= 0:
        raise UsageError("inductances must be positive")
    l_ab = CLARKE @ np.diag([la, lb, lc]) @ CLARKE_INV
    return T_COMPLEX @ l_ab @ T_COMPLEX_INV


def pi_gains_from_bandwidth(alpha_c: float, alpha_pll: float, alpha_s: float | None,
                            params: dict) -> dict:
    """Controller gains from bandwidth figures, SI units.

    The bandwidth numbers enter the design rules directly as plain
    per-second rates (each α is roughly the reciprocal of the loop's time
    constant; no angular conversion is applied):
    current control k_pc = 2α_c·L_fa, k_ic = 2α_c²·L_fa;
    PLL k_ppll = 2α_pll/U_N, k_ipll = 2α_pll²/U_N;
    power control k_ps = α_s/(1.5·U_N·α_c), k_is = α_s/(1.5·U_N).

    Applying an extra 2π to every rule displaces both benchmark stability
    boundaries far from their reference locations, so the plain-rate form
    is the calibrated convention.
    """
    if alpha_c <= 0 or alpha_pll <= 0 or (alpha_s is not None and alpha_s <= 0):
        raise UsageError("bandwidths must be positive")
    l_fa = params["l_fa"]
    u_n = params["u_n"]
    gains = {
        "k_pc": 2.0 * alpha_c * l_fa,
        "k_ic": 2.0 * alpha_c**2 * l_fa,
        "k_ppll": 2.0 * alpha_pll / u_n,
        "k_ipll": 2.0 * alpha_pll**2 / u_n,
    }
    if alpha_s is not None:
        gains["k_ps"] = alpha_s / (1.5 * u_n * alpha_c)
        gains["k_is"] = alpha_s / (1.5 * u_n)
    return gains


# ---------------------------------------------------------------------------
# parameters

CASE1_DEFAULTS = {
    "s_n": 2.0,            # MVA
    "u_n": 0.690,          # kV, line-to-line RMS
    "l_fa": 7.58e-5,       # H, converter filter phase a (= phase b)
    "l_ga": 1.89e-4,       # H, grid phase a (= phase b)
    "k_sym_c": 1.0,        # converter filter phase-c scaling
    "k_sym_g": 1.0,        # grid phase-c scaling
    "i_d_ref": 1.0,        # p.u. current reference, d axis
    "i_q_ref": 0.0,
    "alpha_c": 200.0,      # Hz, current-control bandwidth
    "alpha_pll": 20.0,     # Hz, PLL bandwidth
    "u_ga_mag": 1.0,       # p.u. grid phasors (α, β)
    "u_ga_deg": 0.0,
    "u_gbeta_mag": 1.0,    # balanced positive sequence: β lags α by 90°
    "u_gbeta_deg": -90.0,
    "u_base": 0.563,       # kV, peak phase
    "i_base": 2.368,       # kA, peak phase
    "s_base": 2.0,         # MVA
    "l_base": 0.758e-3,    # H
    "f_base": 50.0,        # Hz
}

CASE2_DEFAULTS = dict(CASE1_DEFAULTS)
CASE2_DEFAULTS.update({
    "c_f": 500e-6,         # F, filter capacitor per phase
    "r_cf": 0.01,          # Ω, capacitor series damping
    "p_ref": 0.5,          # p.u. power reference
    "q_ref": 0.0,
    "alpha_s": 20.0,       # Hz, power-control bandwidth
    "k_sogi": 1.414,       # SOGI damping gain
})

CASE1_LABELS = ("i_c", "i_c_conj", "x_cdq", "x_cdq_conj", "delta_pll", "x_pll")
CASE2_LABELS = (
    "i_c", "i_c_conj",
    "x_cdq_p", "x_cdq_p_conj",
    "x_cdq_n", "x_cdq_n_conj",
    "u_fc", "u_fc_conj",
    "i_g", "i_g_conj",
    "x_sogi", "x_sogi_conj",
    "x_sogi_q", "x_sogi_q_conj",
    "x_pll", "delta_pll",
    "x_sdq", "x_sdq_conj",
)
CASE2_OPEN_LABELS = tuple(l for l in CASE2_LABELS if not l.startswith("i_g"))


def make_params(case: str, overrides: dict | None = None) -> dict:
    """Validated parameter set for ``case1``/``case2`` with overrides applied."""
    defaults = {"case1": CASE1_DEFAULTS, "case2": CASE2_DEFAULTS}.get(case)
    if defaults is None:
        raise UsageError(f"unknown case {case!r} (expected 'case1' or 'case2')")
    params = dict(defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise UsageError(f"unknown parameter {key!r} for {case}")
        params[key] = float(value)
    _validate_params(case, params)
    return params


def _validate_params(case: str, p: dict):
    for key in ("l_fa", "l_ga", "k_sym_c", "k_sym_g", "u_base", "i_base",
                "s_base", "l_base", "f_base", "u_n", "alpha_c", "alpha_pll"):
        if p[key] <= 0:
            raise UsageError(f"parameter {key} must be positive (got {p[key]})")
    if case == "case2":
        if p["c_f"] <= 0:
            raise UsageError("c_f must be positive")
        if p["r_cf"] < 0:
            raise UsageError("r_cf must be nonnegative")
        if p["alpha_s"] <= 0 or p["k_sogi"] <= 0:
            raise UsageError("alpha_s and k_sogi must be positive")


def _phasor(mag: float, deg: float) -> complex:
    return mag * np.exp(1j * np.deg2rad(deg))


def _pair_waveform(u_alpha: complex, u_beta: complex, omega1: float):
    """T-periodic complex pair built from αβ phasors (positive-sequence part
    rotates with +ω₁, the conjugate-of-negative part with −ω₁)."""
    u_pos = 0.5 * (u_alpha + 1j * u_beta)
    u_negc = np.conj(0.5 * (u_alpha - 1j * u_beta))

    def input_fn(t):
        t = np.asarray(t, dtype=float)
        rot = np.exp(1j * omega1 * t)
        v = u_pos * rot + u_negc / rot
        return np.stack([v, np.conj(v)], axis=-1)

    return input_fn


def _norms(p: dict) -> dict:
    """Exact SI -> per-unit conversion factors shared by the builders."""
    omega1 = 2.0 * np.pi * p["f_base"]
    z_base = p["u_base"] / p["i_base"]
    gains = pi_gains_from_bandwidth(p["alpha_c"], p["alpha_pll"], p.get("alpha_s"), p)
    out = {
        "omega1": omega1,
        "kp": gains["k_pc"] / z_base,
        "ki": gains["k_ic"] / z_base,
        "kpp": gains["k_ppll"] * p["u_base"],
        "kip": gains["k_ipll"] * p["u_base"],
        "ff": omega1 * p["l_fa"] / z_base,
        "lf_c": asymmetric_inductance_matrix(
            p["l_fa"], p["l_fa"], p["k_sym_c"] * p["l_fa"]) / z_base,
        "lg_c": asymmetric_inductance_matrix(
            p["l_ga"], p["l_ga"], p["k_sym_g"] * p["l_ga"]) / z_base,
        "i_ref": p["i_d_ref"] + 1j * p["i_q_ref"],
        "u_ga": _phasor(p["u_ga_mag"], p["u_ga_deg"]),
        "u_gbeta": _phasor(p["u_gbeta_mag"], p["u_gbeta_deg"]),
    }
    if "c_f" in p:
        out["c_sec"] = p["c_f"] * z_base
        out["rt"] = p["r_cf"] / z_base
        out["ks"] = gains["k_ps"] * p["s_base"] / p["i_base"]
        out["kis"] = gains["k_is"] * p["s_base"] / p["i_base"]
        out["ksogi"] = p["k_sogi"]
        out["s_ref"] = p["p_ref"] + 1j * p["q_ref"]
    return out


def _const_jac(mat):
    mat = np.asarray(mat, dtype=complex)

    def jac(t, x, u):
        shape = np.asarray(x).shape[:-1]
        return np.broadcast_to(mat, shape + mat.shape).copy()

    return jac


def _current_output(n_states):
    sel = np.zeros((2, n_states), dtype=complex)
    sel[0, 0] = 1.0
    sel[1, 1] = 1.0

    def output(t, x, u):
        return np.asarray(x)[..., :2].copy()

    return output, _const_jac(sel), _const_jac(np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# Case system I

def build_case1(params: dict | None = None) -> dict:
    """Case system I models (closed loop: grid-driven; open loop: bus-driven).

    Closed loop: with no shunt between converter and grid the two series
    inductances carry one current, so the bus (POC) voltage is the algebraic
    divider u_poc = u_g + L_g(L_f+L_g)⁻¹(u_c − u_g); the PLL senses its
    rotating-frame q component.  Open loop: the converter sees u_poc as an
    ideal input; output is the converter current pair (admittance-type scan).
    """
    p = make_params("case1", params)
    nn = _norms(p)
    om1, kp, ki, kpp, kip, ff = (nn[k] for k in ("omega1", "kp", "ki", "kpp", "kip", "ff"))
    i_ref = nn["i_ref"]
    i_ref_c = np.conj(i_ref)
    gsum = np.linalg.inv(nn["lf_c"] + nn["lg_c"])   # 1/s
    kdiv = nn["lg_c"] @ gsum                        # dimensionless divider
    gf = np.linalg.inv(nn["lf_c"])

    # Seed the iteration near the physical operating point: several distinct
    # periodic solutions coexist under severe unbalance, and a zero start can
    # pull the root-finder onto a non-physical (unstable) voltage-lock branch.
    u_pos0 = 0.5 * (nn["u_ga"] + 1j * nn["u_gbeta"])
    delta0 = float(np.angle(u_pos0)) if abs(u_pos0) > 0.0 else 0.0
    xc0 = u_pos0 * np.exp(-1j * delta0)

    IC, ICC, XC, XCC, DELTA, XPLL = range(6)

    def _uc_pair(t, x):
        i, icj = x[..., IC], x[..., ICC]
        xc, xcc = x[..., XC], x[..., XCC]
        delta = x[..., DELTA]
        e = np.exp(1j * (om1 * np.asarray(t, dtype=float) + delta))
        em = 1.0 / e
        uc = kp * (i_ref * e - i) + xc * e + 1j * ff * i
        ucc = kp * (i_ref_c * em - icj) + xcc * em - 1j * ff * icj
        return e, em, uc, ucc

    # -- closed loop -------------------------------------------------------
    def cl_dynamics(t, x, u):
        x = np.asarray(x, dtype=complex)
        u = np.asarray(u, dtype=complex)
        e, em, uc, ucc = _uc_pair(t, x)
        ug, ugc = u[..., 0], u[..., 1]
        d1, d2 = uc - ug, ucc - ugc
        upoc = ug + kdiv[0, 0] * d1 + kdiv[0, 1] * d2
        upocc = ugc + kdiv[1, 0] * d1 + kdiv[1, 1] * d2
        uq = (em * upoc - e * upocc) / 2j
        out = np.zeros(np.broadcast(x[..., 0], e).shape + (6,), dtype=complex)
        out[..., IC] = gsum[0, 0] * d1 + gsum[0, 1] * d2
        out[..., ICC] = gsum[1, 0] * d1 + gsum[1, 1] * d2
        out[..., XC] = ki * (i_ref - em * x[..., IC])
        out[..., XCC] = ki * (i_ref_c - e * x[..., ICC])
        out[..., DELTA] = kpp * uq + x[..., XPLL]
        out[..., XPLL] = kip * uq
        return out

    def cl_jac_state(t, x, u):
        x = np.asarray(x, dtype=complex)
        u = np.asarray(u, dtype=complex)
        e, em, uc, ucc = _uc_pair(t, x)
        ug, ugc = u[..., 0], u[..., 1]
        d1, d2 = uc - ug, ucc - ugc
        upoc = ug + kdiv[0, 0] * d1 + kdiv[0, 1] * d2
        upocc = ugc + kdiv[1, 0] * d1 + kdiv[1, 1] * d2
        shape = np.broadcast(x[..., 0], e).shape
        jac = np.zeros(shape + (6, 6), dtype=complex)
        zero = np.zeros(shape, dtype=complex)
        cols = {
            IC: (-kp + 1j * ff + zero, zero),
            ICC: (zero, -kp - 1j * ff + zero),
            XC: (e, zero),
            XCC: (zero, em),
            DELTA: (1j * e * (kp * i_ref + x[..., XC]),
                    -1j * em * (kp * i_ref_c + x[..., XCC])),
        }
        for col, (a, b) in cols.items():
            jac[..., IC, col] = gsum[0, 0] * a + gsum[0, 1] * b
            jac[..., ICC, col] = gsum[1, 0] * a + gsum[1, 1] * b
            dup = kdiv[0, 0] * a + kdiv[0, 1] * b
            dupc = kdiv[1, 0] * a + kdiv[1, 1] * b
            duq = (em * dup - e * dupc) / 2j
            jac[..., DELTA, col] = kpp * duq
            jac[..., XPLL, col] = kip * duq
        # rotation of the demodulators with the PLL angle
        upocd = (em * upoc + e * upocc) / 2.0
        jac[..., DELTA, DELTA] += -kpp * upocd
        jac[..., XPLL, DELTA] += -kip * upocd
        jac[..., XC, IC] = -ki * em
        jac[..., XC, DELTA] = 1j * ki * em * x[..., IC]
        jac[..., XCC, ICC] = -ki * e
        jac[..., XCC, DELTA] = -1j * ki * e * x[..., ICC]
        jac[..., DELTA, XPLL] += 1.0
        return jac

    def cl_jac_input(t, x, u):
        x = np.asarray(x, dtype=complex)
        delta = x[..., DELTA]
        e = np.exp(1j * (om1 * np.asarray(t, dtype=float) + delta))
        em = 1.0 / e
        shape = np.broadcast(x[..., 0], e).shape
        jac = np.zeros(shape + (6, 2), dtype=complex)
        jac[..., IC, 0] = -gsum[0, 0]
        jac[..., IC, 1] = -gsum[0, 1]
        jac[..., ICC, 0] = -gsum[1, 0]
        jac[..., ICC, 1] = -gsum[1, 1]
        for col in (0, 1):
            dup = (1.0 if col == 0 else 0.0) - kdiv[0, col]
            dupc = (1.0 if col == 1 else 0.0) - kdiv[1, col]
            duq = (em * dup - e * dupc) / 2j
            jac[..., DELTA, col] = kpp * duq
            jac[..., XPLL, col] = kip * duq
        return jac

    output, out_js, out_ji = _current_output(6)
    closed = SystemModel(
        n_states=6, n_inputs=2, n_outputs=2, omega1=om1,
        dynamics=cl_dynamics, output=output,
        jac_state=cl_jac_state, jac_input=cl_jac_input,
        out_jac_state=out_js, out_jac_input=out_ji,
        input_fn=_pair_waveform(nn["u_ga"], nn["u_gbeta"], om1),
        state_labels=CASE1_LABELS,
        conjugate_pairs=((IC, ICC), (XC, XCC)),
        spectral_seeds=((IC, +1, i_ref), (ICC, -1, i_ref_c),
                        (XC, 0, xc0), (XCC, 0, np.conj(xc0)),
                        (DELTA, 0, delta0)),
        name="case1",
    )

    # -- open loop (bus voltage as input) ----------------------------------
    def ol_dynamics(t, x, u):
        x = np.asarray(x, dtype=complex)
        u = np.asarray(u, dtype=complex)
        e, em, uc, ucc = _uc_pair(t, x)
        upoc, upocc = u[..., 0], u[..., 1]
        d1, d2 = uc - upoc, ucc - upocc
        uq = (em * upoc - e * upocc) / 2j
        out = np.zeros(np.broadcast(x[..., 0], e).shape + (6,), dtype=complex)
        out[..., IC] = gf[0, 0] * d1 + gf[0, 1] * d2
        out[..., ICC] = gf[1, 0] * d1 + gf[1, 1] * d2
        out[..., XC] = ki * (i_ref - em * x[..., IC])
        out[..., XCC] = ki * (i_ref_c - e * x[..., ICC])
        out[..., DELTA] = kpp * uq + x[..., XPLL]
        out[..., XPLL] = kip * uq
        return out

    def ol_jac_state(t, x, u):
        x = np.asarray(x, dtype=complex)
        u = np.asarray(u, dtype=complex)
        e, em, uc, ucc = _uc_pair(t, x)
        upoc, upocc = u[..., 0], u[..., 1]
        shape = np.broadcast(x[..., 0], e).shape
        jac = np.zeros(shape + (6, 6), dtype=complex)
        zero = np.zeros(shape, dtype=complex)
        cols = {
            IC: (-kp + 1j * ff + zero, zero),
            ICC: (zero, -kp - 1j * ff + zero),
            XC: (e, zero),
            XCC: (zero, em),
            DELTA: (1j * e * (kp * i_ref + x[..., XC]),
                    -1j * em * (kp * i_ref_c + x[..., XCC])),
        }
        for col, (a, b) in cols.items():
            jac[..., IC, col] = gf[0, 0] * a + gf[0, 1] * b
            jac[..., ICC, col] = gf[1, 0] * a + gf[1, 1] * b
        upocd = (em * upoc + e * upocc) / 2.0
        jac[..., DELTA, DELTA] = -kpp * upocd
        jac[..., XPLL, DELTA] = -kip * upocd
        jac[..., XC, IC] = -ki * em
        jac[..., XC, DELTA] = 1j * ki * em * x[..., IC]
        jac[..., XCC, ICC] = -ki * e
        jac[..., XCC, DELTA] = -1j * ki * e * x[..., ICC]
        jac[..., DELTA, XPLL] = 1.0
        return jac

    def ol_jac_input(t, x, u):
        x = np.asarray(x, dtype=complex)
        delta = x[..., DELTA]
        e = np.exp(1j * (om1 * np.asarray(t, dtype=float) + delta))
        em = 1.0 / e
        shape = np.broadcast(x[..., 0], e).shape
        jac = np.zeros(shape + (6, 2), dtype=complex)
        jac[..., IC, 0] = -gf[0, 0]
        jac[..., IC, 1] = -gf[0, 1]
        jac[..., ICC, 0] = -gf[1, 0]
        jac[..., ICC, 1] = -gf[1, 1]
        jac[..., DELTA, 0] = kpp * em / 2j
        jac[..., DELTA, 1] = -kpp * e / 2j
        jac[..., XPLL, 0] = kip * em / 2j
        jac[..., XPLL, 1] = -kip * e / 2j
        return jac

    output_o, out_js_o, out_ji_o = _current_output(6)
    open_loop = SystemModel(
        n_states=6, n_inputs=2, n_outputs=2, omega1=om1,
        dynamics=ol_dynamics, output=output_o,
        jac_state=ol_jac_state, jac_input=ol_jac_input,
        out_jac_state=out_js_o, out_jac_input=out_ji_o,
        input_fn=_pair_waveform(nn["u_ga"], nn["u_gbeta"], om1),
        state_labels=CASE1_LABELS,
        conjugate_pairs=((IC, ICC), (XC, XCC)),
        spectral_seeds=((IC, +1, i_ref), (ICC, -1, i_ref_c),
                        (XC, 0, xc0), (XCC, 0, np.conj(xc0)),
                        (DELTA, 0, delta0)),
        name="case1_open",
    )
    return {"closed_loop": closed, "open_loop": open_loop}


# ---------------------------------------------------------------------------
# Case system II

def build_case2(params: dict | None = None) -> dict:
    """Case system II models.

    Closed loop (18 states): converter current behind the symmetric L filter,
    dual-frame current control (positive frame carries the inductive
    feedforward; negative frame regulates to zero), filter-capacitor voltage
    with series damping resistor defining the bus voltage, grid current
    through the asymmetric grid inductance, SOGI in-phase/quadrature states
    whose combination extracts the positive-sequence bus voltage for PLL and
    power control, PLL, and the power-controller integrator producing the
    positive-frame current reference.

    Open loop (16 states): the grid current pair is removed and the bus is
    driven by the input voltage; the capacitor branch stays on the converter
    side, so the exported current is i_c − i_cap with i_cap flowing through
    the damping resistor — a genuine feedthrough term in the scan.
    """
    p = make_params("case2", params)
    nn = _norms(p)
    om1, kp, ki, kpp, kip = (nn[k] for k in ("omega1", "kp", "ki", "kpp", "kip"))
    ff, c_sec, rt, kps, kis, ksogi = (nn[k] for k in ("ff", "c_sec", "rt", "ks", "kis", "ksogi"))
    s_ref = nn["s_ref"]
    s_ref_c = np.conj(s_ref)
    gf = np.linalg.inv(nn["lf_c"])
    gg = np.linalg.inv(nn["lg_c"])

    # near-equilibrium iteration seeds (see the case-I builder for rationale)
    u_pos0 = 0.5 * (nn["u_ga"] + 1j * nn["u_gbeta"])
    delta0 = float(np.angle(u_pos0)) if abs(u_pos0) > 0.0 else 0.0
    xcp0 = u_pos0 * np.exp(-1j * delta0)
    xq0 = u_pos0 / (1j * om1)

    (IC, ICC, XCP, XCPC, XCN, XCNC, UF, UFC, IG, IGC,
     XS, XSC, XQ, XQC, XPLL, DELTA, XSD, XSDC) = range(18)

    def _pieces(t, x):
        """Shared algebraic intermediates (everything except the bus voltage)."""
        e = np.exp(1j * (om1 * np.asarray(t, dtype=float) + x[..., DELTA]))
        em = 1.0 / e
        up = 0.5 * (x[..., XS] + 1j * om1 * x[..., XQ])
        upc = 0.5 * (x[..., XSC] - 1j * om1 * x[..., XQC])
        s = up * x[..., ICC]
        sc = upc * x[..., IC]
        iref = kps * (s_ref_c - sc) + x[..., XSD]
        irefc = kps * (s_ref - s) + x[..., XSDC]
        uq = (em * up - e * upc) / 2j
        uc = kp * (iref * e - x[..., IC]) + e * x[..., XCP] + 1j * ff * x[..., IC] \
            - kp * x[..., IC] + em * x[..., XCN]
        ucc = kp * (irefc * em - x[..., ICC]) + em * x[..., XCPC] - 1j * ff * x[..., ICC] \
            - kp * x[..., ICC] + e * x[..., XCNC]
        return e, em, up, upc, s, sc, iref, irefc, uq, uc, ucc

    def _common_rows(out, x, e, em, up, upc, s, sc, iref, irefc, uq):
        out[..., XCP] = ki * (iref - em * x[..., IC])
        out[..., XCPC] = ki * (irefc - e * x[..., ICC])
        out[..., XCN] = -ki * e * x[..., IC]
        out[..., XCNC] = -ki * em * x[..., ICC]
        out[..., XQ] = x[..., XS]
        out[..., XQC] = x[..., XSC]
        out[..., XPLL] = kip * uq
        out[..., DELTA] = kpp * uq + x[..., XPLL]
        # Both channels of the reference PI must act on the conjugated power
        # error (i* ∝ conj of the power mismatch); integrating the plain error
        # instead turns the loop into ẋ ∝ -x*, a saddle with eigenvalues ±k.
        out[..., XSD] = kis * (s_ref_c - sc)
        out[..., XSDC] = kis * (s_ref - s)

    def cl_dynamics(t, x, u):
        x = np.asarray(x, dtype=complex)
        u = np.asarray(u, dtype=complex)
        e, em, up, upc, s, sc, iref, irefc, uq, uc, ucc = _pieces(t, x)
        upoc = x[..., UF] + rt * (x[..., IC] - x[..., IG])
        upocc = x[..., UFC] + rt * (x[..., ICC] - x[..., IGC])
        ug, ugc = u[..., 0], u[..., 1]
        out = np.zeros(np.broadcast(x[..., 0], e).shape + (18,), dtype=complex)
        out[..., IC] = gf[0, 0] * (uc - upoc) + gf[0, 1] * (ucc - upocc)
        out[..., ICC] = gf[1, 0] * (uc - upoc) + gf[1, 1] * (ucc - upocc)
        out[..., UF] = (x[..., IC] - x[..., IG]) / c_sec
        out[..., UFC] = (x[..., ICC] - x[..., IGC]) / c_sec
        out[..., IG] = gg[0, 0] * (upoc - ug) + gg[0, 1] * (upocc - ugc)
        out[..., IGC] = gg[1, 0] * (upoc - ug) + gg[1, 1] * (upocc - ugc)
        out[..., XS] = om1 * ksogi * (upoc - x[..., XS]) - om1**2 * x[..., XQ]
        out[..., XSC] = om1 * ksogi * (upocc - x[..., XSC]) - om1**2 * x[..., XQC]
        _common_rows(out, x, e, em, up, upc, s, sc, iref, irefc, uq)
        return out

    def _derivative_pieces(x, e, em, up, upc, iref, irefc, shape, n):
        """(shape, n) gradient rows of the algebraic intermediates."""
        z = np.zeros(shape + (n,), dtype=complex)
        dup, dupc = z.copy(), z.copy()
        dup[..., XS] = 0.5
        dup[..., XQ] = 0.5j * om1
        dupc[..., XSC] = 0.5
        dupc[..., XQC] = -0.5j * om1
        ds, dsc = z.copy(), z.copy()
        ds[..., XS] = 0.5 * x[..., ICC]
        ds[..., XQ] = 0.5j * om1 * x[..., ICC]
        ds[..., ICC] = up
        dsc[..., XSC] = 0.5 * x[..., IC]
        dsc[..., XQC] = -0.5j * om1 * x[..., IC]
        dsc[..., IC] = upc
        diref = -kps * dsc
        diref[..., XSD] += 1.0
        direfc = -kps * ds
        direfc[..., XSDC] += 1.0
        duq = (em[..., None] * dup - e[..., None] * dupc) / 2j
        duq[..., DELTA] += -(em * up + e * upc) / 2.0
        duc = kp * e[..., None] * diref
        duc[..., IC] += -2.0 * kp + 1j * ff
        duc[..., XCP] += e
        duc[..., XCN] += em
        duc[..., DELTA] += 1j * e * (kp * iref + x[..., XCP]) - 1j * em * x[..., XCN]
        ducc = kp * em[..., None] * direfc
        ducc[..., ICC] += -2.0 * kp - 1j * ff
        ducc[..., XCPC] += em
        ducc[..., XCNC] += e
        ducc[..., DELTA] += -1j * em * (kp * irefc + x[..., XCPC]) + 1j * e * x[..., XCNC]
        return dup, dupc, ds, dsc, diref, direfc, duq, duc, ducc

    def cl_jac_state(t, x, u):
        x = np.asarray(x, dtype=complex)
        e, em, up, upc, s, sc, iref, irefc, uq, uc, ucc = _pieces(t, x)
        shape = np.broadcast(x[..., 0], e).shape
        (dup_, dupc_, ds, dsc, diref, direfc, duq, duc, ducc) = \
            _derivative_pieces(x, e, em, up, upc, iref, irefc, shape, 18)
        dupoc = np.zeros(shape + (18,), dtype=complex)
        dupoc[..., UF] = 1.0
        dupoc[..., IC] = rt
        dupoc[..., IG] = -rt
        dupocc = np.zeros(shape + (18,), dtype=complex)
        dupocc[..., UFC] = 1.0
        dupocc[..., ICC] = rt
        dupocc[..., IGC] = -rt
        jac = np.zeros(shape + (18, 18), dtype=complex)
        jac[..., IC, :] = gf[0, 0] * (duc - dupoc) + gf[0, 1] * (ducc - dupocc)
        jac[..., ICC, :] = gf[1, 0] * (duc - dupoc) + gf[1, 1] * (ducc - dupocc)
        jac[..., XCP, :] = ki * diref
        jac[..., XCP, IC] += -ki * em
        jac[..., XCP, DELTA] += 1j * ki * em * x[..., IC]
        jac[..., XCPC, :] = ki * direfc
        jac[..., XCPC, ICC] += -ki * e
        jac[..., XCPC, DELTA] += -1j * ki * e * x[..., ICC]
        jac[..., XCN, IC] = -ki * e
        jac[..., XCN, DELTA] = -1j * ki * e * x[..., IC]
        jac[..., XCNC, ICC] = -ki * em
        jac[..., XCNC, DELTA] = 1j * ki * em * x[..., ICC]
        jac[..., UF, IC] = 1.0 / c_sec
        jac[..., UF, IG] = -1.0 / c_sec
        jac[..., UFC, ICC] = 1.0 / c_sec
        jac[..., UFC, IGC] = -1.0 / c_sec
        jac[..., IG, :] = gg[0, 0] * dupoc + gg[0, 1] * dupocc
        jac[..., IGC, :] = gg[1, 0] * dupoc + gg[1, 1] * dupocc
        jac[..., XS, :] = om1 * ksogi * dupoc
        jac[..., XS, XS] += -om1 * ksogi
        jac[..., XS, XQ] += -om1**2
        jac[..., XSC, :] = om1 * ksogi * dupocc
        jac[..., XSC, XSC] += -om1 * ksogi
        jac[..., XSC, XQC] += -om1**2
        jac[..., XQ, XS] = 1.0
        jac[..., XQC, XSC] = 1.0
        jac[..., XPLL, :] = kip * duq
        jac[..., DELTA, :] = kpp * duq
        jac[..., DELTA, XPLL] += 1.0
        jac[..., XSD, :] = -kis * dsc
        jac[..., XSDC, :] = -kis * ds
        return jac

    cl_b = np.zeros((18, 2), dtype=complex)
    cl_b[IG, 0] = -gg[0, 0]
    cl_b[IG, 1] = -gg[0, 1]
    cl_b[IGC, 0] = -gg[1, 0]
    cl_b[IGC, 1] = -gg[1, 1]

    output, out_js, out_ji = _current_output(18)
    closed = SystemModel(
        n_states=18, n_inputs=2, n_outputs=2, omega1=om1,
        dynamics=cl_dynamics, output=output,
        jac_state=cl_jac_state, jac_input=_const_jac(cl_b),
        out_jac_state=out_js, out_jac_input=out_ji,
        input_fn=_pair_waveform(nn["u_ga"], nn["u_gbeta"], om1),
        state_labels=CASE2_LABELS,
        conjugate_pairs=((IC, ICC), (XCP, XCPC), (XCN, XCNC), (UF, UFC),
                         (IG, IGC), (XS, XSC), (XQ, XQC), (XSD, XSDC)),
        spectral_seeds=((IC, +1, s_ref_c), (ICC, -1, s_ref),
                        (IG, +1, s_ref_c), (IGC, -1, s_ref),
                        (XCP, 0, xcp0), (XCPC, 0, np.conj(xcp0)),
                        (UF, +1, u_pos0), (UFC, -1, np.conj(u_pos0)),
                        (XS, +1, u_pos0), (XSC, -1, np.conj(u_pos0)),
                        (XQ, +1, xq0), (XQC, -1, np.conj(xq0)),
                        (DELTA, 0, delta0),
                        (XSD, 0, s_ref_c), (XSDC, 0, s_ref)),
        name="case2",
    )

    # -- open loop: drop grid current, drive the bus directly ---------------
    (oIC, oICC, oXCP, oXCPC, oXCN, oXCNC, oUF, oUFC,
     oXS, oXSC, oXQ, oXQC, oXPLL, oDELTA, oXSD, oXSDC) = range(16)
    # map open-loop indices onto the shared closed-loop piece indices
    _omap = (IC, ICC, XCP, XCPC, XCN, XCNC, UF, UFC, XS, XSC, XQ, XQC,
             XPLL, DELTA, XSD, XSDC)

    def _expand(x16):
        """View the 16-state vector as an 18-slot vector (grid current zero)."""
        shape = x16.shape[:-1]
        x18 = np.zeros(shape + (18,), dtype=complex)
        x18[..., list(_omap)] = x16
        return x18

    def ol_dynamics(t, x, u):
        x = np.asarray(x, dtype=complex)
        u = np.asarray(u, dtype=complex)
        x18 = _expand(x)
        e, em, up, upc, s, sc, iref, irefc, uq, uc, ucc = _pieces(t, x18)
        upoc, upocc = u[..., 0], u[..., 1]
        icap = (upoc - x18[..., UF]) / rt
        icapc = (upocc - x18[..., UFC]) / rt
        out18 = np.zeros(np.broadcast(x[..., 0], e).shape + (18,), dtype=complex)
        out18[..., IC] = gf[0, 0] * (uc - upoc) + gf[0, 1] * (ucc - upocc)
        out18[..., ICC] = gf[1, 0] * (uc - upoc) + gf[1, 1] * (ucc - upocc)
        out18[..., UF] = icap / c_sec
        out18[..., UFC] = icapc / c_sec
        out18[..., XS] = om1 * ksogi * (upoc - x18[..., XS]) - om1**2 * x18[..., XQ]
        out18[..., XSC] = om1 * ksogi * (upocc - x18[..., XSC]) - om1**2 * x18[..., XQC]
        _common_rows(out18, x18, e, em, up, upc, s, sc, iref, irefc, uq)
        return out18[..., list(_omap)]

    def ol_jac_state(t, x, u):
        x = np.asarray(x, dtype=complex)
        x18 = _expand(x)
        e, em, up, upc, s, sc, iref, irefc, uq, uc, ucc = _pieces(t, x18)
        shape = np.broadcast(x[..., 0], e).shape
        (dup_, dupc_, ds, dsc, diref, direfc, duq, duc, ducc) = \
            _derivative_pieces(x18, e, em, up, upc, iref, irefc, shape, 18)
        jac18 = np.zeros(shape + (18, 18), dtype=complex)
        jac18[..., IC, :] = gf[0, 0] * duc + gf[0, 1] * ducc
        jac18[..., ICC, :] = gf[1, 0] * duc + gf[1, 1] * ducc
        jac18[..., XCP, :] = ki * diref
        jac18[..., XCP, IC] += -ki * em
        jac18[..., XCP, DELTA] += 1j * ki * em * x18[..., IC]
        jac18[..., XCPC, :] = ki * direfc
        jac18[..., XCPC, ICC] += -ki * e
        jac18[..., XCPC, DELTA] += -1j * ki * e * x18[..., ICC]
        jac18[..., XCN, IC] = -ki * e
        jac18[..., XCN, DELTA] = -1j * ki * e * x18[..., IC]
        jac18[..., XCNC, ICC] = -ki * em
        jac18[..., XCNC, DELTA] = 1j * ki * em * x18[..., ICC]
        jac18[..., UF, UF] = -1.0 / (rt * c_sec)
        jac18[..., UFC, UFC] = -1.0 / (rt * c_sec)
        jac18[..., XS, XS] = -om1 * ksogi
        jac18[..., XS, XQ] = -om1**2
        jac18[..., XSC, XSC] = -om1 * ksogi
        jac18[..., XSC, XQC] = -om1**2
        jac18[..., XQ, XS] = 1.0
        jac18[..., XQC, XSC] = 1.0
        jac18[..., XPLL, :] = kip * duq
        jac18[..., DELTA, :] = kpp * duq
        jac18[..., DELTA, XPLL] += 1.0
        jac18[..., XSD, :] = -kis * dsc
        jac18[..., XSDC, :] = -kis * ds
        rows = np.ix_(list(_omap), list(_omap))
        return jac18[..., rows[0], rows[1]]

    ol_b = np.zeros((16, 2), dtype=complex)
    ol_b[oIC, 0] = -gf[0, 0]
    ol_b[oIC, 1] = -gf[0, 1]
    ol_b[oICC, 0] = -gf[1, 0]
    ol_b[oICC, 1] = -gf[1, 1]
    ol_b[oUF, 0] = 1.0 / (rt * c_sec)
    ol_b[oUFC, 1] = 1.0 / (rt * c_sec)
    ol_b[oXS, 0] = om1 * ksogi
    ol_b[oXSC, 1] = om1 * ksogi

    def ol_output(t, x, u):
        x = np.asarray(x, dtype=complex)
        u = np.asarray(u, dtype=complex)
        icap = (u[..., 0] - x[..., oUF]) / rt
        icapc = (u[..., 1] - x[..., oUFC]) / rt
        return np.stack([x[..., oIC] - icap, x[..., oICC] - icapc], axis=-1)

    ol_c = np.zeros((2, 16), dtype=complex)
    ol_c[0, oIC] = 1.0
    ol_c[0, oUF] = 1.0 / rt
    ol_c[1, oICC] = 1.0
    ol_c[1, oUFC] = 1.0 / rt
    ol_d = np.diag([-1.0 / rt, -1.0 / rt]).astype(complex)

    open_loop = SystemModel(
        n_states=16, n_inputs=2, n_outputs=2, omega1=om1,
        dynamics=ol_dynamics, output=ol_output,
        jac_state=ol_jac_state, jac_input=_const_jac(ol_b),
        out_jac_state=_const_jac(ol_c), out_jac_input=_const_jac(ol_d),
        input_fn=_pair_waveform(nn["u_ga"], nn["u_gbeta"], om1),
        state_labels=CASE2_OPEN_LABELS,
        conjugate_pairs=((oIC, oICC), (oXCP, oXCPC), (oXCN, oXCNC),
                         (oUF, oUFC), (oXS, oXSC), (oXQ, oXQC), (oXSD, oXSDC)),
        spectral_seeds=((oIC, +1, s_ref_c), (oICC, -1, s_ref),
                        (oXCP, 0, xcp0), (oXCPC, 0, np.conj(xcp0)),
                        (oUF, +1, u_pos0), (oUFC, -1, np.conj(u_pos0)),
                        (oXS, +1, u_pos0), (oXSC, -1, np.conj(u_pos0)),
                        (oXQ, +1, xq0), (oXQC, -1, np.conj(xq0)),
                        (oDELTA, 0, delta0),
                        (oXSD, 0, s_ref_c), (oXSDC, 0, s_ref)),
        name="case2_open",
    )
    return {"closed_loop": closed, "open_loop": open_loop}


def case_builder(name: str):
    """Factory lookup: 'case1' / 'case2'."""
    try:
        return {"case1": build_case1, "case2": build_case2}[name]
    except KeyError:
        raise UsageError(f"unknown case {name!r} (expected 'case1' or 'case2')") from None
