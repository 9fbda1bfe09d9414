"""Command-line front end: exact objects, p-adic reduction and verification suites."""
from __future__ import annotations

import json
import math
import os
import random
import sys
from importlib import resources

import click
import jsonschema

from . import padic_cartan as pc
from .exact_arith import RationalFn, eval_complex
from .hall_littlewood import TSpec, inner_product_numeric, p_poly, q_poly, stabilizer_value
from .schwartz_plancherel import (
    THREADS_ENV,
    SchwartzFn,
    dominant_signatures,
    inversion_check,
    plancherel_check,
    rank_samples,
    rank_signatures,
    total_mass,
)
from .spherical import (
    ParameterError,
    SpaceParams,
    check_functional_equation,
    check_holomorphic_invariance,
    omega_closed_rank1,
    omega_explicit,
    psi_normalized,
    simplify,
)
from .weyl_roots import enumerate_group, w_tilde

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECISION = 0, 1, 2, 3
DEFAULT_SEED = 0


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


def _schema() -> dict:
    text = resources.files("unitary_spherical").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)


def parse_ints(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t != "")
    except ValueError:
        raise InputError(f"cannot parse integer list {text!r}")


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise InputError(f"cannot parse complex number {text!r}")


def poly_json(p) -> dict:
    if isinstance(p, RationalFn):
        return {"num": poly_json(p.num), "den": poly_json(p.den)}
    return {"nvars": p.nvars,
            "terms": [{"v": k[0], "x": list(k[1:]), "c": c.canonical()} for k, c in p.sorted_items()]}


def render(p) -> str:
    return p.pretty()


def _cnum(z: complex) -> list:
    return [z.real, z.imag]


def _check(name: str, residual: float | None, tol: float | None, ok: bool | None = None, **detail) -> dict:
    if ok is None:
        ok = residual is not None and math.isfinite(residual) and residual < tol
    out = {"name": name, "pass": bool(ok), "residual": residual, "tolerance": tol}
    if detail:
        out["detail"] = detail
    return out


def emit(report: dict, as_json: bool, text_lines: list) -> None:
    jsonschema.validate(report, _schema())
    if as_json:
        click.echo(json.dumps(report, sort_keys=True, indent=2))
    else:
        for line in text_lines:
            click.echo(line)


def _params(m: int, e: int) -> SpaceParams:
    try:
        return SpaceParams(m, e)
    except ParameterError as exc:
        raise InputError(str(exc))


def _prime_for(e: int, prime: int | None) -> int:
    p = prime if prime is not None else (2 if e == 1 else 3)
    if not pc.is_prime(p):
        raise InputError(f"{p} is not prime")
    if (p == 2) != (e == 1):
        raise InputError(f"prime {p} is inconsistent with e={e} (e = 1 exactly when p = 2)")
    return p


json_flag = click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")


@click.group()
@click.option("--threads", type=int, default=None, help=f"Worker threads for quadrature (also {THREADS_ENV}).")
def main(threads: int | None) -> None:
    """Spherical functions on p-adic unitary hermitian spaces."""
    if threads is not None:
        os.environ[THREADS_ENV] = str(max(1, threads))


@main.command()
@click.option("--n", "n", type=int, default=None, help="Rank (defaults to the length of mu).")
@click.option("--m", "m", type=int, required=True, help="Matrix size; only its parity matters.")
@click.option("--mu", required=True, help="Comma separated dominant weight.")
@click.option("--what", type=click.Choice(["P", "Q", "W", "all"]), default="P")
@json_flag
def hl(n, m, mu, what, as_json):
    """Hall-Littlewood P_mu, Q_mu and W_mu for the hermitian specialization."""
    mu = parse_ints(mu)
    n = len(mu) if n is None else n
    if len(mu) != n:
        raise InputError(f"mu has {len(mu)} parts but n = {n}")
    if m < 2:
        raise InputError("m must be at least 2")
    t = TSpec.for_matrix_size(m)
    try:
        objs = {"P": p_poly(mu, n, t), "Q": q_poly(mu, n, t), "W": stabilizer_value(mu, t)}
    except ValueError as exc:
        raise InputError(str(exc))
    keys = ["P", "Q", "W"] if what == "all" else [what]
    result = {"n": n, "m": m, "mu": list(mu)}
    lines = []
    for k in keys:
        obj = objs[k]
        if k == "W":
            result[k] = {"terms": [{"v": kk[0], "c": c.canonical()} for kk, c in obj.sorted_items()]}
        else:
            result[k] = poly_json(obj)
        result[k]["pretty"] = render(obj)
        lines.append(f"{k} = {render(obj)}")
    emit({"command": "hl", "ok": True, "result": result}, as_json, lines)


def _lambda_option(required: bool = True):
    return click.option("--lambda", "lam", required=required, help="Comma separated signature.")


@main.command()
@click.option("--m", type=int, required=True)
@click.option("--e", type=int, default=0)
@_lambda_option()
@json_flag
def omega(m, e, lam, as_json):
    """The explicit spherical function omega(x_lambda; z)."""
    params = _params(m, e)
    try:
        lam = params.signature(parse_ints(lam))
    except ValueError as exc:
        raise InputError(str(exc))
    om = omega_explicit(lam, params)
    shown = simplify(om)
    result = {"m": m, "e": e, "lambda": list(lam), "omega": poly_json(shown), "pretty": render(shown)}
    lines = [f"omega = {render(shown)}"]
    if params.n == 1:
        match = om == omega_closed_rank1(lam[0], m, e)
        result["closed_form_match"] = match
        lines.append(f"closed form agrees: {'yes' if match else 'no'}")
    emit({"command": "omega", "ok": True, "result": result}, as_json, lines)


@main.command()
@click.option("--m", type=int, required=True)
@click.option("--e", type=int, default=0)
@_lambda_option()
@json_flag
def psi(m, e, lam, as_json):
    """Psi(x_lambda; z) = omega(x_lambda; z) / omega(x_{-e}; z)."""
    params = _params(m, e)
    try:
        lam = params.signature(parse_ints(lam))
    except ValueError as exc:
        raise InputError(str(exc))
    shown = simplify(psi_normalized(lam, params))
    result = {"m": m, "e": e, "lambda": list(lam), "psi": poly_json(shown), "pretty": render(shown)}
    emit({"command": "psi", "ok": True, "result": result}, as_json, [render(shown)])


@main.command()
@click.argument("matrix_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--no-check", is_flag=True, help="Skip the membership test for X.")
@json_flag
def cartan(matrix_file, no_check, as_json):
    """Cartan signature and orbit invariants of a hermitian matrix in X."""
    try:
        x = pc.load_matrix(matrix_file)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"bad matrix file: {exc}")
    m = len(x)
    try:
        if not no_check:
            pc.require_in_X(x)
        inv = pc.orbit_invariants(x)
        lam = pc.cartan_reduce(x, check=False) if m % 2 else None
    except pc.MembershipError as exc:
        raise InputError(str(exc))
    result = {"m": m, "p": x[0][0].field.p, "lambda": list(lam) if lam is not None else None,
              "invariants": inv.as_dict()}
    lines = [f"lambda = {'(' + ', '.join(map(str, lam)) + ')' if lam is not None else 'n/a (even m)'}",
             f"parity = {'undetermined at this precision' if inv.parity is None else inv.parity}",
             f"jtype = {str(inv.jtype).lower()}", f"r = {'n/a' if inv.r is None else inv.r}"]
    emit({"command": "cartan", "ok": True, "result": result}, as_json, lines)


# ---------------------------------------------------------------------------
# verify


def _verify_feq(cfg: dict) -> list:
    params = _params(cfg["m"], cfg["e"])
    q = cfg["q"] if cfg["q"] is not None else float(_prime_for(cfg["e"], None))
    lams = [params.signature(cfg["lambda"])] if cfg["lambda"] else dominant_signatures(params, 2)
    checks = []
    for lam in lams:
        worst = 0.0
        for sigma in enumerate_group(params.n):
            r = check_functional_equation(lam, sigma, params, q, seed=cfg["seed"], count=cfg["samples"])
            worst = max(worst, r)
        checks.append(_check(f"functional equations lambda={lam}", worst, cfg["tol"] or 1e-10))
        checks.append(_check(f"holomorphic part W-invariant lambda={lam}", None, None,
                             ok=check_holomorphic_invariance(lam, params)))
    return checks


def _verify_orth(cfg: dict) -> list:
    m = cfg["m"]
    n = cfg["n"] if cfg["n"] is not None else m // 2
    parity = "even" if m % 2 == 0 else "odd"
    t = TSpec.for_parity(parity)
    grid = cfg["grid"] or (256 if n == 1 else 64)
    tol = cfg["tol"] or (1e-8 if n == 1 else 1e-6)
    q = cfg["q"] or 2.0
    mus = dominant_signatures(SpaceParams(2 * n + (m % 2), 0), cfg["max_part"])
    polys = {mu: p_poly(mu, n, t) for mu in mus}
    w0 = w_tilde((0,) * n, parity).eval(q)
    worst = 0.0
    for a in mus:
        for b in mus:
            val = inner_product_numeric(polys[a], polys[b], n, t, q, grid)
            want = w0 / w_tilde(a, parity).eval(q) if a == b else 0
            worst = max(worst, abs(val - want))
    return [_check(f"orthogonality n={n} parity={parity} q={q} grid={grid}", worst, tol)]


def _verify_plancherel(cfg: dict) -> list:
    params = _params(cfg["m"], cfg["e"])
    q = cfg["q"] or float(_prime_for(cfg["e"], cfg["prime"]))
    grid = cfg["grid"] or (256 if params.n == 1 else 64)
    tol = cfg["tol"] or (1e-8 if params.n == 1 else 1e-5)
    lams = [lam for lam in dominant_signatures(params, cfg["max_part"])
            if sum(a + params.e for a in lam) <= cfg["max_part"]]
    worst = 0.0
    for a in lams:
        for b in lams:
            r = plancherel_check(SchwartzFn.indicator(a, params), SchwartzFn.indicator(b, params), q, grid)
            worst = max(worst, r.relative)
    mass = total_mass(params, q, grid)
    mass_tol = 1e-10 if params.n == 1 else 1e-6
    return [_check(f"Parseval on indicators q={q} grid={grid}", worst, tol),
            _check("total mass of the Plancherel measure", abs(mass - 1), mass_tol)]


def _verify_inversion(cfg: dict) -> list:
    params = _params(cfg["m"], cfg["e"])
    q = cfg["q"] or float(_prime_for(cfg["e"], cfg["prime"]))
    grid = cfg["grid"] or (256 if params.n == 1 else 64)
    tol = cfg["tol"] or 1e-6
    rng = random.Random(cfg["seed"])
    phi = SchwartzFn.random(params, cfg["terms"], cfg["max_part"], rng)
    worst = 0.0
    for lam in dominant_signatures(params, cfg["max_part"]):
        r = inversion_check(phi, lam, q, grid, conjugate=not cfg["literal"])
        worst = max(worst, r.residual)
    return [_check(f"inversion of a random {cfg['terms']}-term function", worst, tol,
                   phi=[[list(lam), _cnum(c)] for lam, c in phi.terms.items()])]


def _verify_rank(cfg: dict) -> list:
    params = _params(cfg["m"], cfg["e"])
    q = cfg["q"] or float(_prime_for(cfg["e"], cfg["prime"]))
    tol = cfg["tol"] or 1e-8
    out = []
    lams = rank_signatures(params, q)
    for z, d in rank_samples(params, q, cfg["samples"], cfg["seed"]):
        out.append(_check("rank determinant", d, None, ok=d > tol,
                          z=[_cnum(c) for c in z], signatures=[list(l) for l in lams]))
        out[-1]["tolerance"] = tol
    return out


def _verify_oracle(cfg: dict) -> list:
    p = cfg["prime"] or 3
    if not pc.is_prime(p):
        raise InputError(f"{p} is not prime")
    e = 1 if p == 2 else 0
    lams = [cfg["lambda"][0]] if cfg["lambda"] else list(range(-e, 3))
    ss = [cfg["s"]] if cfg["s"] is not None else [0, 1, 2, 1 + 1j]
    tol = cfg["tol"] or 1e-12
    out = []
    for lam in lams:
        if len(cfg["lambda"] or ()) > 1:
            raise InputError("the oracle is rank one: give a single part")
        try:
            N = cfg["precision"] or pc.oracle_min_precision(lam, p)
            d1 = pc.bruteforce_distributions(lam, p, N)
            d2 = pc.bruteforce_distributions(lam, p, 2 * N)
        except ValueError as exc:
            raise InputError(str(exc))
        out.append(_check(f"stationary under precision doubling lambda={lam}", None, None, ok=d1 == d2))
        for s in ss:
            bf = pc.omega_bruteforce_m2(lam, s, p, N)
            cf = eval_complex(omega_closed_rank1(lam, 2, e), p, [-s - 0.5])
            out.append(_check(f"oracle lambda={lam} s={s}", abs(bf - cf), tol,
                              bruteforce=_cnum(bf), closed_form=_cnum(cf)))
    return out


def _verify_cartan(cfg: dict) -> list:
    m, e = cfg["m"], cfg["e"]
    if m % 2 == 0:
        raise InputError("constructive reduction covers odd m")
    params = _params(m, e)
    p = _prime_for(e, cfg["prime"])
    F = pc.QuadField(p, cfg["precision"] or pc.DEFAULT_PREC)
    lams = [params.signature(cfg["lambda"])] if cfg["lambda"] else dominant_signatures(params, 2)
    out = []
    for idx, lam in enumerate(lams):
        sampler = pc.KSampler(F, seed=cfg["seed"] * 1000 + idx)
        x = pc.make_x_lambda(lam, m, F)
        inv = pc.orbit_invariants(x)
        bad = []
        for trial in range(cfg["trials"]):
            y = pc.act(sampler.element(m), x)
            got = pc.cartan_reduce(y, check=False)
            if got != lam or pc.orbit_invariants(y) != inv:
                bad.append(trial)
        out.append(_check(f"cartan lambda={lam}", None, None, ok=not bad,
                          failures=bad, invariants=inv.as_dict()))
    return out


SUITES = {
    "feq": _verify_feq,
    "orth": _verify_orth,
    "plancherel": _verify_plancherel,
    "inversion": _verify_inversion,
    "rank": _verify_rank,
    "oracle": _verify_oracle,
    "cartan": _verify_cartan,
}


@main.command()
@click.argument("suite", type=click.Choice(sorted(SUITES)))
@click.option("--m", type=int, default=2)
@click.option("--e", type=int, default=0)
@click.option("--n", type=int, default=None)
@_lambda_option(required=False)
@click.option("--q", "q", type=float, default=None, help="Numeric value of q (default: the prime).")
@click.option("--prime", type=int, default=None)
@click.option("--precision", type=int, default=None, help="p-adic precision N.")
@click.option("--grid", type=int, default=None)
@click.option("--samples", type=int, default=None)
@click.option("--trials", type=int, default=50)
@click.option("--terms", type=int, default=3)
@click.option("--max-part", type=int, default=3)
@click.option("--s", "s", default=None, help="Complex exponent for the oracle, e.g. 1+1i.")
@click.option("--seed", type=int, default=DEFAULT_SEED)
@click.option("--tol", type=float, default=None, help="Override the default tolerance.")
@click.option("--literal", is_flag=True, help="Inversion with Psi instead of conj(Psi).")
@json_flag
def verify(suite, m, e, n, lam, q, prime, precision, grid, samples, trials, terms, max_part, s,
           seed, tol, literal, as_json):
    """Run a verification suite; exit 0 iff every check passes."""
    cfg = {"m": m, "e": e, "n": n, "lambda": parse_ints(lam) if lam else None, "q": q, "prime": prime,
           "precision": precision, "grid": grid, "trials": trials, "terms": terms, "max_part": max_part,
           "s": parse_complex(s) if s is not None else None, "seed": seed, "tol": tol, "literal": literal,
           "samples": samples if samples is not None else (20 if suite == "feq" else 10)}
    if prime is not None and suite != "oracle":
        _prime_for(e, prime)
    checks = SUITES[suite](cfg)
    ok = all(c["pass"] for c in checks)
    shown = {k: (_cnum(v) if isinstance(v, complex) else v) for k, v in cfg.items()}
    shown["lambda"] = list(cfg["lambda"]) if cfg["lambda"] else None
    report = {"command": "verify", "suite": suite, "seed": seed, "ok": ok, "config": shown, "checks": checks}
    lines = [f"suite: {suite}", f"seed: {seed}"]
    for c in checks:
        res = "" if c["residual"] is None else f" residual={c['residual']:.3e}"
        tl = "" if c["tolerance"] is None else f" tol={c['tolerance']:.0e}"
        lines.append(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}{res}{tl}")
    lines.append("PASS" if ok else "FAIL")
    emit(report, as_json, lines)
    if not ok:
        sys.exit(EXIT_FAIL)


def run() -> None:
    try:
        main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code if isinstance(exc, InputError) else EXIT_INPUT)
    except click.exceptions.Abort:
        sys.exit(EXIT_FAIL)
    except pc.PrecisionError as exc:
        click.echo(f"Error: {exc}", err=True)
        sys.exit(EXIT_PRECISION)
    except pc.MembershipError as exc:
        click.echo(f"Error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except (ParameterError, ValueError) as exc:
        click.echo(f"Error: {exc}", err=True)
        sys.exit(EXIT_INPUT)


if __name__ == "__main__":
    run()
