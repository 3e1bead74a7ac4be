"""The experiments behind the CLI subcommands.

Each experiment declares typed parameters, and either a per-chunk replica
function plus a summariser (Monte Carlo runs) or a single deterministic
evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import _tridiag_kernels as TK
from .. import kpz, measures, ratefn, riccati, spectra, tridiag
from ..errors import DomainError
from .engine import mean_stderr

_REQUIRED = object()


@dataclass(frozen=True)
class Param:
    kind: str                 # int, float, floats, bool, str
    default: object = _REQUIRED
    help: str = ""


def _convert(name, kind, value):
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "floats":
            if isinstance(value, str):
                return [float(v) for v in value.split(",") if v.strip()]
            return [float(v) for v in np.atleast_1d(value)]
        if kind == "bool":
            if isinstance(value, str):
                low = value.strip().lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off", ""):
                    return False
                raise ValueError(value)
            return bool(value)
        return str(value)
    except (TypeError, ValueError):
        raise DomainError(f"--{name.replace('_', '-')}: cannot read {value!r} as {kind}") from None


class Experiment:
    name = ""
    params: dict = {}
    main_table = "estimates"

    def resolve(self, raw: dict) -> dict:
        out = {}
        unknown = set(raw) - set(self.params)
        if unknown:
            raise DomainError(f"unknown parameter --{sorted(unknown)[0].replace('_', '-')} for {self.name}")
        for key, param in self.params.items():
            if key in raw and raw[key] is not None:
                out[key] = _convert(key, param.kind, raw[key])
            elif param.default is _REQUIRED:
                raise DomainError(f"missing required flag --{key.replace('_', '-')}")
            else:
                out[key] = param.default
        self.validate(out)
        return out

    def validate(self, p):
        pass

    def replicated_for(self, p) -> bool:
        return True

    def chunk_size(self, p) -> int:
        return 128


def _positive(p, *keys):
    for k in keys:
        if not p[k] > 0:
            raise DomainError(f"--{k.replace('_', '-')} must be positive")


def _n_ok(n):
    if n < 2:
        raise DomainError("--n must be >= 2")


def _est(estimates, stderrs, name, values):
    estimates[name], stderrs[name] = mean_stderr(values)


# -- tridiagonal model ------------------------------------------------------------

class GbeSample(Experiment):
    """Sample tridiagonal GbetaE matrices; entry moments and the rescaled top eigenvalue."""

    name = "gbe-sample"
    params = {
        "n": Param("int", help="matrix size"),
        "beta": Param("float", 2.0),
        "dump": Param("str", "", "write replica 0 as a diag,offdiag CSV"),
    }

    def validate(self, p):
        _n_ok(p["n"])
        _positive(p, "beta")

    def chunk(self, p, seed, a, b):
        n, beta = p["n"], p["beta"]
        diag, off = tridiag.sample_gbeta_batch(n, beta, seed, a, b)
        top = tridiag.top_k_batch(diag, off, 1, 1e-9)[:, 0]
        dof = np.arange(n - 1, 0, -1, dtype=float)
        return {
            "diag_mean": diag.mean(axis=1),
            "offdiag_sq_first": off[:, 0] ** 2 / (n - 1),
            "offdiag_sq_ratio": np.mean(off ** 2 / dof, axis=1),
            "top_rescaled": tridiag.rescale_edge(top, n),
        }

    def summarize(self, p, data, config):
        est, se = {}, {}
        for key in ("diag_mean", "offdiag_sq_first", "offdiag_sq_ratio", "top_rescaled"):
            _est(est, se, key, data[key])
        if p["dump"]:
            tridiag.write_matrix_csv(tridiag.sample_gbeta(p["n"], p["beta"], config.seed, 0), p["dump"])
        return est, se, {}


def _edge_shift(n, level):
    """Unscaled point whose edge rescaling is ``level``."""
    return 2.0 * math.sqrt(n) + np.asarray(level, dtype=float) * n ** (-1.0 / 6.0)


class TwTail(Experiment):
    """Left-tail frequencies of the rescaled top eigenvalue and their slope against s^3."""

    name = "tw-tail"
    main_table = "tail"
    params = {
        "n": Param("int"),
        "beta": Param("float", 2.0),
        "s_grid": Param("floats", [2.0, 2.5, 3.0, 3.5]),
        "tol": Param("float", 1e-9, "bisection width for the top eigenvalue"),
        "moments": Param("bool", True, "also extract the top eigenvalue for its mean and variance"),
    }

    def validate(self, p):
        _n_ok(p["n"])
        _positive(p, "beta", "tol")
        if not p["s_grid"]:
            raise DomainError("--s-grid must list at least one value")

    def chunk_size(self, p):
        return 256

    def chunk(self, p, seed, a, b):
        n = p["n"]
        diag, off = tridiag.sample_gbeta_batch(n, p["beta"], seed, a, b)
        shifts = np.broadcast_to(_edge_shift(n, -np.asarray(p["s_grid"])), (b - a, len(p["s_grid"])))
        counts = TK.sturm_counts(diag, off ** 2, shifts)
        out = {"below": (counts == n).astype(float)}
        if p["moments"]:
            out["top"] = tridiag.rescale_edge(tridiag.top_k_batch(diag, off, 1, p["tol"])[:, 0], n)
        return out

    def summarize(self, p, data, config):
        est, se = {}, {}
        rows = []
        for j, s in enumerate(p["s_grid"]):
            f, f_se = mean_stderr(data["below"][:, j])
            lf = math.log(f) if f > 0 else math.nan
            lf_se = f_se / f if f > 0 else math.nan
            est[f"freq_s={s:g}"], se[f"freq_s={s:g}"] = f, f_se
            rows.append([s, lf, lf_se])
        s3 = np.array([r[0] ** 3 for r in rows])
        lf = np.array([r[1] for r in rows])
        ok = np.isfinite(lf)
        est["slope_vs_s3"] = float(np.polyfit(s3[ok], lf[ok], 1)[0]) if ok.sum() >= 2 else math.nan
        if "top" in data:
            _est(est, se, "mean_top", data["top"])
            top = data["top"]
            est["var_top"] = math.fsum((top - est["mean_top"]) ** 2) / max(top.size - 1, 1)
        return est, se, {"tail": {"columns": ["s", "log_freq", "stderr"], "rows": rows}}


class Rigidity(Experiment):
    """Fraction of eigenvalues outside their classical-location windows."""

    name = "rigidity"
    main_table = "rigidity"
    params = {
        "n": Param("int"),
        "beta": Param("float", 2.0),
        "a": Param("floats", [0.5, 1.0]),
    }

    def validate(self, p):
        _n_ok(p["n"])
        _positive(p, "beta")
        if not p["a"] or any(not 0 < a <= 1 for a in p["a"]):
            raise DomainError("--a values must lie in (0, 1]")

    def chunk_size(self, p):
        return 32

    def chunk(self, p, seed, a, b):
        diag, off = tridiag.sample_gbeta_batch(p["n"], p["beta"], seed, a, b)
        return {"frac": tridiag.rigidity_violations(diag, off, p["a"])}

    def summarize(self, p, data, config):
        est, se, rows = {}, {}, []
        for j, a in enumerate(p["a"]):
            name = f"violation_fraction_a={a:g}"
            _est(est, se, name, data["frac"][:, j])
            rows.append([a, est[name], se[name]])
        return est, se, {"rigidity": {"columns": ["a", "violation_fraction", "stderr"], "rows": rows}}


class Decay(Experiment):
    """Tail decay of the top eigenvector: last ratio, sign constancy and log-slope."""

    name = "decay"
    params = {
        "n": Param("int"),
        "beta": Param("float", 2.0),
        "i_star": Param("int", 0, "onset index; 0 means ceil(4 n^(1/3))"),
    }

    def validate(self, p):
        _n_ok(p["n"])
        _positive(p, "beta")
        if p["i_star"] == 0:
            p["i_star"] = int(math.ceil(4.0 * p["n"] ** (1.0 / 3.0)))
        if not 1 <= p["i_star"] < p["n"]:
            raise DomainError("--i-star must lie in [1, n)")

    def chunk_size(self, p):
        return 64

    def chunk(self, p, seed, a, b):
        n = p["n"]
        diag, off = tridiag.sample_gbeta_batch(n, p["beta"], seed, a, b)
        lam = tridiag.top_k_batch(diag, off, 1, 1e-12)[:, 0]
        sign, logabs = tridiag.eigenvector_log_batch(diag, off, lam)
        out = {k: np.empty(b - a) for k in ("ratio", "fit", "sign_constant", "tail_negative")}
        for r in range(b - a):
            rep = tridiag.decay_diagnostics(tridiag.LogVector(sign[r], logabs[r]), n, p["i_star"])
            out["ratio"][r] = rep.last_ratio
            out["fit"][r] = rep.decay_fit
            out["sign_constant"][r] = rep.sign_constant_beyond
            out["tail_negative"][r] = rep.riccati_tail_negative
        return out

    def summarize(self, p, data, config):
        est, se = {}, {}
        _est(est, se, "frac_ratio_le_9/8", data["ratio"] <= 9.0 / 8.0)
        _est(est, se, "frac_sign_constant", data["sign_constant"])
        _est(est, se, "frac_fit_le_-1/12", data["fit"] <= -1.0 / 12.0)
        _est(est, se, "frac_riccati_tail_negative", data["tail_negative"])
        _est(est, se, "mean_last_ratio", data["ratio"])
        _est(est, se, "mean_decay_fit", data["fit"])
        return est, se, {}


# -- diffusion ------------------------------------------------------------------

class SaoSimulate(Experiment):
    """Blow-up counts N(lambda) of the Riccati diffusion, optionally next to matrix counts."""

    name = "sao-simulate"
    main_table = "counts"
    params = {
        "beta": Param("float", 2.0),
        "lam": Param("floats"),
        "h0": Param("float", 1e-3),
        "matrix_n": Param("int", 0, "also count edge eigenvalues of GbetaE(n) for comparison"),
    }

    def validate(self, p):
        _positive(p, "beta", "h0")
        if not p["lam"]:
            raise DomainError("--lam must list at least one value")
        if p["matrix_n"] and p["matrix_n"] < 2:
            raise DomainError("--matrix-n must be 0 or >= 2")

    def chunk_size(self, p):
        return 256

    def chunk(self, p, seed, a, b):
        out = {"count": riccati.count_batch(p["lam"], p["beta"], seed, a, b, h0=p["h0"]).astype(float)}
        n = p["matrix_n"]
        if n:
            diag, off = tridiag.sample_gbeta_batch(n, p["beta"], seed, a, b, substream=1)
            # the operator's eigenvalues are the negated rescaled matrix eigenvalues
            shifts = np.broadcast_to(_edge_shift(n, -np.asarray(p["lam"])), (b - a, len(p["lam"])))
            out["matrix"] = (n - TK.sturm_counts(diag, off ** 2, shifts)).astype(float)
        return out

    def summarize(self, p, data, config):
        est, se, rows = {}, {}, []
        for j, lam in enumerate(p["lam"]):
            name = f"mean_count_lam={lam:g}"
            _est(est, se, name, data["count"][:, j])
            row = [lam, est[name], se[name], spectra.airy_count(lam),
                   spectra.airy_count(lam, spectra.AirySpectrumMode.EXACT)]
            if "matrix" in data:
                mname = f"matrix_mean_count_lam={lam:g}"
                _est(est, se, mname, data["matrix"][:, j])
                row += [est[mname], se[mname]]
            rows.append(row)
        cols = ["lam", "mean_count", "stderr", "airy_count_asymptotic", "airy_count_exact"]
        if "matrix" in data:
            cols += ["matrix_mean_count", "matrix_stderr"]
        return est, se, {"counts": {"columns": cols, "rows": rows}}


class BlowupTimes(Experiment):
    """Distribution of the first blow-up time with drift x - a - p^2."""

    name = "blowup-times"
    params = {
        "a": Param("float"),
        "beta": Param("float", 2.0),
        "h0": Param("float", 1e-3),
        "M": Param("float", 0.0, "late-time level; 0 disables that check"),
        "eps": Param("float", 0.25),
        "delta": Param("float", 0.25),
    }

    def validate(self, p):
        _positive(p, "beta", "h0")
        if not p["a"] >= 15:
            raise DomainError("--a must be >= 15 for the blow-up window to apply")
        if p["M"] and not math.pi * math.sqrt(p["a"]) <= p["M"] <= p["a"] ** 2 / 100:
            raise DomainError("--M must lie in [pi*sqrt(a), a^2/100]")

    def chunk_size(self, p):
        return 256

    def chunk(self, p, seed, a, b):
        return {"delta": riccati.first_blowup_batch(p["a"], p["beta"], seed, a, b, h0=p["h0"])}

    def summarize(self, p, data, config):
        est, se = riccati._summary(data["delta"], p["a"], p["beta"], p["eps"], p["delta"], p["M"] or None)
        return est, se, {}


class DeviationEvent(Experiment):
    """Frequency of large counts N(R k^(2/3)) >= eta R^(3/2) k."""

    name = "deviation-event"
    main_table = "events"
    params = {
        "R": Param("float", 1.0),
        "k": Param("int", 1),
        "eta": Param("floats", [15.0, 20.0, 25.0]),
        "beta": Param("float", 2.0),
        "h0": Param("float", 1e-3),
    }

    def validate(self, p):
        _positive(p, "beta", "h0")
        if p["R"] < 1 or p["k"] < 1 or not p["eta"] or min(p["eta"]) < 15:
            raise DomainError("need --R >= 1, --k >= 1 and every --eta >= 15")

    def chunk_size(self, p):
        return 256

    def chunk(self, p, seed, a, b):
        lam = p["R"] * p["k"] ** (2.0 / 3.0)
        return {"count": riccati.count_batch(lam, p["beta"], seed, a, b, h0=p["h0"]).astype(float)}

    def summarize(self, p, data, config):
        est, se, rows = {}, {}, []
        scale = p["R"] ** 1.5 * p["k"]
        for eta in p["eta"]:
            name = f"freq_eta={eta:g}"
            _est(est, se, name, data["count"] >= eta * scale)
            rows.append([eta, est[name], se[name]])
        _est(est, se, "mean_count", data["count"])
        return est, se, {"events": {"columns": ["eta", "frequency", "stderr"], "rows": rows}}


# -- KPZ --------------------------------------------------------------------------

def _edge_points(diag, off, n, level):
    """Rescaled top eigenvalues of each matrix down to the first one below ``level``.

    Returns a ``(B, K)`` array padded with ``-inf``.
    """
    off2 = off ** 2
    counts = TK.sturm_counts(diag, off2, np.full((diag.shape[0], 1), _edge_shift(n, level)))[:, 0]
    k = int(min(n, n - counts.min() + 1))
    vals = tridiag.rescale_edge(tridiag.top_k_batch(diag, off, k, 1e-10), n)
    need = np.minimum(n - counts + 1, n)
    pad = np.arange(k)[None, :] >= need[:, None]
    return np.where(pad, -np.inf, vals)


class Kpz(Experiment):
    """Tail-bound formulas, or Monte Carlo of the Laplace-transform products over edge points."""

    name = "kpz"
    main_table = "kpz"
    params = {
        "mode": Param("str", "bounds", "bounds or mc"),
        "s": Param("floats", [2.0], "tail depths"),
        "T": Param("float", 1e6, "time"),
        "epsilon": Param("float", 0.1),
        "C": Param("float", 1.0, "free constant"),
        "K": Param("float", 1.0, "free constant"),
        "S": Param("float", 0.0, "depth below which bounds are flagged"),
        "half_space": Param("bool", False),
        "u": Param("floats", [1.0], "half-space Laplace parameters (mc mode)"),
        "n": Param("int", 512, "matrix size for edge points (mc mode)"),
        "beta": Param("float", 0.0, "0 means 2 (full line) or 1 (half line)"),
    }

    def validate(self, p):
        if p["mode"] not in ("bounds", "mc"):
            raise DomainError("--mode must be 'bounds' or 'mc'")
        _positive(p, "T")
        if not p["s"]:
            raise DomainError("--s must list at least one value")
        if p["beta"] == 0:
            p["beta"] = 1.0 if p["half_space"] else 2.0
        _positive(p, "beta")
        if p["mode"] == "mc":
            _n_ok(p["n"])
            if p["half_space"] and (not p["u"] or min(p["u"]) <= 0):
                raise DomainError("--u values must be positive")

    def replicated_for(self, p):
        return p["mode"] == "mc"

    def evaluate(self, p, config):
        est, rows = {}, []
        fn = kpz.kpz2_bounds if p["half_space"] else kpz.kpz1_bounds
        for s in p["s"]:
            b = fn(kpz.KpzParams(s, p["T"], p["epsilon"], p["C"], p["K"], p["S"]))
            est[f"log_lower_s={s:g}"] = b.log_lower
            est[f"log_upper_s={s:g}"] = b.log_upper
            rows.append([s, b.log_lower, b.log_upper, b.lower, b.upper, int(b.below_threshold)])
        cols = ["s", "log_lower", "log_upper", "lower", "upper", "below_threshold"]
        return est, {}, {"kpz": {"columns": cols, "rows": rows}}

    def chunk(self, p, seed, a, b):
        n, t = p["n"], p["T"] ** (1.0 / 3.0)
        diag, off = tridiag.sample_gbeta_batch(n, p["beta"], seed, a, b)
        s = np.asarray(p["s"])
        if p["half_space"]:
            u = np.asarray(p["u"])
            level = float(np.min((np.log(1.0 / (4.0 * u)) - kpz.TRUNCATION_MARGIN) / t)) - 1e-9
            pts = _edge_points(diag, off, n, level)
            prod = np.array([[kpz.laplace_product_halfspace(r[np.isfinite(r)], uu, p["T"]).value
                              for uu in u] for r in pts])
            return {"product": prod, "top": pts[:, 0]}
        level = float(np.min(-s - kpz.TRUNCATION_MARGIN / t)) - 1e-9
        pts = _edge_points(diag, off, n, level)
        prod = np.array([[kpz.laplace_product(r[np.isfinite(r)], ss, p["T"]).value for ss in s]
                         for r in pts])
        return {"product": prod, "indicator": (pts[:, :1] <= -s[None, :]).astype(float)}

    def summarize(self, p, data, config):
        est, se, rows = {}, {}, []
        if p["half_space"]:
            for j, u in enumerate(p["u"]):
                name = f"product_mean_u={u:g}"
                _est(est, se, name, data["product"][:, j])
                rows.append([u, est[name], se[name]])
            return est, se, {"kpz": {"columns": ["u", "product_mean", "stderr"], "rows": rows}}
        for j, s in enumerate(p["s"]):
            pn, fn = f"product_mean_s={s:g}", f"indicator_freq_s={s:g}"
            _est(est, se, pn, data["product"][:, j])
            _est(est, se, fn, data["indicator"][:, j])
            rows.append([s, est[pn], se[pn], est[fn], se[fn]])
        cols = ["s", "product_mean", "product_stderr", "indicator_freq", "indicator_stderr"]
        return est, se, {"kpz": {"columns": cols, "rows": rows}}


# -- measures and rate functions -----------------------------------------------------

def _load_measure(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return measures.measure_from_json(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise DomainError(f"{path}: not a measure JSON ({exc})") from None


class BlDistance(Experiment):
    """Bounded-Lipschitz distance between measures read from JSON or sampled from GbetaE."""

    name = "bl-distance"
    params = {
        "mu": Param("str", "", "measure JSON file"),
        "nu": Param("str", "", "measure JSON file (default: zero measure)"),
        "R": Param("float", 1.0),
        "m": Param("int", 1024),
        "compact": Param("bool", False),
        "n": Param("int", 0, "with no --mu: sample GbetaE(n) and measure mu_{n,k} against 0"),
        "k": Param("int", 1),
        "beta": Param("float", 2.0),
    }

    def validate(self, p):
        _positive(p, "R")
        if p["m"] < 64:
            raise DomainError("--m must be >= 64")
        if not p["mu"] and not p["n"]:
            raise DomainError("missing required flag --mu (or --n for sampled measures)")
        if p["n"] and not p["n"] >= p["k"] >= 1:
            raise DomainError("need --n >= --k >= 1")

    def replicated_for(self, p):
        return not p["mu"]

    def chunk_size(self, p):
        return 16

    def evaluate(self, p, config):
        mu = _load_measure(p["mu"])
        nu = _load_measure(p["nu"]) if p["nu"] else measures.SignedMeasure(window=(-p["R"], p["R"]))
        r = measures.bl_distance(mu, nu, p["R"], p["m"], p["compact"])
        est = {"distance": r.value, "error_bound": r.error_bound, "h": r.h, "under_resolved": float(r.under_resolved)}
        return est, {}, {}

    def chunk(self, p, seed, a, b):
        n, k, R = p["n"], p["k"], p["R"]
        diag, off = tridiag.sample_gbeta_batch(n, p["beta"], seed, a, b)
        # atoms with b_i <= R are the eigenvalues above sqrt(n) (2 - R (k/n)^(2/3))
        level = math.sqrt(n) * (2.0 - R * (k / n) ** (2.0 / 3.0))
        counts = TK.sturm_counts(diag, off ** 2, np.full((b - a, 1), level))[:, 0]
        kk = int(max(1, n - counts.min()))
        vals = tridiag.top_k_batch(diag, off, kk, 1e-10)
        zero = measures.SignedMeasure(window=(-R, R))
        d = np.empty(b - a)
        for r in range(b - a):
            mu = measures.mu_nk(vals[r, : n - counts[r]], n, k, R)
            d[r] = measures.bl_distance(mu, zero, R, p["m"], p["compact"]).value
        return {"distance": d}

    def summarize(self, p, data, config):
        est, se = {}, {}
        _est(est, se, "mean_distance", data["distance"])
        return est, se, {}


class RateFn(Experiment):
    """Evaluate the half-space rate, or psi, I2 and J for a measure read from JSON."""

    name = "rate-fn"
    main_table = "psi"
    params = {
        "phi_minus": Param("bool", False, "evaluate the half-space rate at --z"),
        "z": Param("float", 0.0),
        "measure": Param("str", "", "measure JSON file"),
        "R0": Param("float", 1.0),
        "R1": Param("float", 1.0),
        "c": Param("float", 1.0, "free constant in psi (not a known value)"),
        "grid": Param("int", 2048),
        "n": Param("int", 0, "with --k: also evaluate J0"),
        "k": Param("int", 0),
    }

    def validate(self, p):
        if not p["phi_minus"] and not p["measure"]:
            raise DomainError("missing required flag --measure (or --phi-minus)")

    def replicated_for(self, p):
        return False

    def evaluate(self, p, config):
        if p["phi_minus"]:
            return {"phi_minus": ratefn.phi_minus(p["z"])}, {}, {}
        mu = _load_measure(p["measure"])
        rp = ratefn.RateParams(p["R0"], p["R1"], p["c"])
        trace = ratefn.psi_and_I2(mu, rp, p["grid"])
        est = {"rate_I": ratefn.rate_I(mu, rp), "I2": trace.I2}
        try:
            est["J"] = ratefn.log_energy_J(mu)
            if p["n"] and p["k"]:
                est["J0"] = ratefn.log_energy_J0(mu, p["n"], p["k"])
        except DomainError:
            est["J"] = math.inf
        rows = [[float(x), float(v)] for x, v in zip(trace.x, trace.psi)]
        return est, {}, {"psi": {"columns": ["x", "psi"], "rows": rows}}


REGISTRY = {e.name: e for e in (GbeSample(), SaoSimulate(), TwTail(), Rigidity(), BlDistance(),
                                RateFn(), Kpz(), Decay(), BlowupTimes(), DeviationEvent())}
