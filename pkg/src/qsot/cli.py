"""Command-line verification surface over JSON scene files.

Every command loads a scene, runs one library capability, and emits a report
either as human-readable text or as a single JSON object (``--report
structured``).  Exit status: 0 when all checks pass, 1 when a check fails,
2 on input errors.

Structured reports always carry the same top-level fields in the same order:
``command``, ``passed``, ``tol``, ``checks`` (a list of ``{name, deviation,
tol, passed}`` objects), and ``data`` with command-specific payloads.
"""

from __future__ import annotations

import json

import click
import numpy as np

from . import __version__
from .algebra import AlgebraElement, max_abs_diff
from .bayes import check_bayes_covariance, solve_bayes
from .bloom import all_parenthesizations, bloom_tree, catalan
from .broadcast import check_broadcast_axioms
from .chanmap import ad_unitary, map_max_diff
from .covariance import StarIsomorphism, check_chain_covariance, tensor_iso
from .dynamics import evolution_unitary, transform_hamiltonian, unitary_chain
from .scene import Scene, SceneError, parse_scene
from .sot import marginal, spectrum_report, star, verify_marginals, verify_propagator

PASS, FAIL = "PASS", "FAIL"


class Check:
    def __init__(self, name: str, deviation: float, tol: float):
        self.name = name
        self.deviation = float(deviation)
        self.tol = float(tol)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "deviation": self.deviation,
            "tol": self.tol,
            "passed": self.passed,
        }


def _matrix_json(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _blocks_json(e: AlgebraElement) -> list:
    return [_matrix_json(b) for b in e.blocks]


def _emit(ctx, command: str, checks: list[Check], data: dict) -> None:
    passed = all(c.passed for c in checks)
    if ctx.obj["report"] == "structured":
        doc = {
            "command": command,
            "passed": passed,
            "tol": ctx.obj["tol"],
            "checks": [c.as_dict() for c in checks],
            "data": data,
        }
        click.echo(json.dumps(doc))
    else:
        for c in checks:
            verdict = PASS if c.passed else FAIL
            click.echo(f"check {c.name}: {verdict} (deviation {c.deviation:.3e}, tol {c.tol:.1e})")
        for key, value in data.items():
            if isinstance(value, (int, float, str, bool)):
                click.echo(f"{key}: {value}")
        click.echo(f"result: {PASS if passed else FAIL}")
    ctx.exit(0 if passed else 1)


def _load(ctx, scene_path: str) -> Scene:
    try:
        return parse_scene(scene_path)
    except SceneError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)


@click.group()
@click.version_option(__version__)
@click.option("--tol", type=float, default=1e-9, show_default=True, help="Check tolerance.")
@click.option("--seed", type=int, default=2024, show_default=True, help="Seed for randomized sweeps.")
@click.option("--trials", type=int, default=100, show_default=True, help="Trials for randomized sweeps.")
@click.option(
    "--report",
    type=click.Choice(["text", "structured"]),
    default="text",
    show_default=True,
    help="Report format.",
)
@click.pass_context
def main(ctx, tol, seed, trials, report):
    """Verification commands for states over time, covariance, and Bayes rules."""
    ctx.obj = {"tol": tol, "seed": seed, "trials": trials, "report": report}


def _get_chain_state(ctx, scene: Scene, chain: str, state: str):
    try:
        ch = scene.lookup("chains", chain)
        rho = scene.lookup("states", state)
    except SceneError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    if rho.shape != ch.algebras[0]:
        click.echo(
            f"input error: state {state!r} does not live in the first algebra of chain {chain!r}",
            err=True,
        )
        ctx.exit(2)
    return ch, rho


@main.command("star")
@click.option("--scene", required=True, type=click.Path())
@click.option("--chain", "chain_name", required=True)
@click.option("--state", "state_name", required=True)
@click.pass_context
def star_cmd(ctx, scene, chain_name, state_name):
    """Build the state over time and verify its defining marginal property."""
    sc = _load(ctx, scene)
    ch, rho = _get_chain_state(ctx, sc, chain_name, state_name)
    tol = ctx.obj["tol"]
    s = star(ch, rho, tol=max(tol, 1e-9))
    flat = s.value.flatten()
    rep = verify_marginals(s, tol)
    checks = [
        Check("self_adjoint", flat.hermiticity_deviation(), tol),
        Check("unit_trace", abs(flat.trace() - 1.0), tol),
        Check("marginals", rep.max_deviation, tol),
    ]
    data = {
        "factors": [list(f.blocks) for f in s.factors],
        "trace": float(flat.trace().real),
        "value_blocks": _blocks_json(flat),
    }
    _emit(ctx, "star", checks, data)


@main.command("marginals")
@click.option("--scene", required=True, type=click.Path())
@click.option("--chain", "chain_name", required=True)
@click.option("--state", "state_name", required=True)
@click.pass_context
def marginals_cmd(ctx, scene, chain_name, state_name):
    """Compare every marginal of the state over time with the evolved state."""
    sc = _load(ctx, scene)
    ch, rho = _get_chain_state(ctx, sc, chain_name, state_name)
    tol = ctx.obj["tol"]
    s = star(ch, rho, tol=max(tol, 1e-9))
    rep = verify_marginals(s, tol)
    checks = [Check(f"marginal_{i}", d, tol) for i, d in enumerate(rep.deviations)]
    data = {
        "marginal_blocks": [_blocks_json(marginal(s, i)) for i in range(len(s.factors))],
    }
    _emit(ctx, "marginals", checks, data)


@main.command("spectrum")
@click.option("--scene", required=True, type=click.Path())
@click.option("--chain", "chain_name", required=True)
@click.option("--state", "state_name", required=True)
@click.pass_context
def spectrum_cmd(ctx, scene, chain_name, state_name):
    """Eigenvalues of the state over time, with a negativity summary."""
    sc = _load(ctx, scene)
    ch, rho = _get_chain_state(ctx, sc, chain_name, state_name)
    tol = ctx.obj["tol"]
    s = star(ch, rho, tol=max(tol, 1e-9))
    rep = spectrum_report(s, tol)
    flat = s.value.flatten()
    checks = [
        Check("self_adjoint", flat.hermiticity_deviation(), tol),
        Check("unit_trace", abs(flat.trace() - 1.0), tol),
    ]
    data = {
        "min_eigenvalue": rep.min_eigenvalue,
        "negative_count": rep.negative_count,
        "eigenvalues": [float(v) for v in rep.eigenvalues],
    }
    _emit(ctx, "spectrum", checks, data)


@main.command("propagator")
@click.option("--scene", required=True, type=click.Path())
@click.option("--chain", "chain_name", required=True)
@click.option("--state", "state_name", required=True)
@click.pass_context
def propagator_cmd(ctx, scene, chain_name, state_name):
    """Verify that the chain's state over time propagates step by step."""
    sc = _load(ctx, scene)
    ch, rho = _get_chain_state(ctx, sc, chain_name, state_name)
    if len(ch) < 2:
        click.echo("input error: the propagation check needs a chain of length >= 2", err=True)
        ctx.exit(2)
    tol = ctx.obj["tol"]
    rep = verify_propagator(ch, rho, tol)
    _emit(ctx, "propagator", [Check("propagation", rep.deviation, tol)], {"steps": len(ch)})


@main.command("broadcast-axioms")
@click.option("--scene", required=True, type=click.Path())
@click.option("--algebra", "algebra_name", required=True)
@click.pass_context
def broadcast_axioms_cmd(ctx, scene, algebra_name):
    """Check unitary covariance, swap invariance, and classical consistency."""
    sc = _load(ctx, scene)
    try:
        shape = sc.lookup("algebras", algebra_name)
    except SceneError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    if not shape.is_matrix_algebra:
        click.echo("input error: broadcast axioms are checked on matrix algebras", err=True)
        ctx.exit(2)
    tol = ctx.obj["tol"]
    rep = check_broadcast_axioms(shape, trials=ctx.obj["trials"], seed=ctx.obj["seed"], tol=tol)
    checks = [
        Check("unitary_covariance", rep.covariance_deviation, tol),
        Check("swap_invariance", rep.permutation_deviation, tol),
        Check("classical_consistency", rep.classical_deviation, tol),
    ]
    _emit(ctx, "broadcast-axioms", checks, {"trials": rep.trials})


@main.command("parenthesization")
@click.option("--scene", required=True, type=click.Path())
@click.option("--chain", "chain_name", required=True)
@click.pass_context
def parenthesization_cmd(ctx, scene, chain_name):
    """Compare the chain bloom across every parenthesization of its target."""
    sc = _load(ctx, scene)
    try:
        ch = sc.lookup("chains", chain_name)
    except SceneError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    tol = ctx.obj["tol"]
    trees = all_parenthesizations(len(ch) + 1)
    mats = [bloom_tree(ch, t) for t in trees]
    worst = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            worst = max(worst, map_max_diff(mats[i], mats[j]))
    checks = [Check("pairwise_agreement", worst, tol)]
    _emit(
        ctx,
        "parenthesization",
        checks,
        {"tree_count": len(trees), "expected_count": catalan(len(ch))},
    )


@main.command("covariance")
@click.option("--scene", required=True, type=click.Path())
@click.option("--chain", "chain_name", required=True)
@click.option("--state", "state_name", required=True)
@click.option("--isos", required=True, help="Comma-separated isomorphism names, one per step algebra.")
@click.option("--intermediate", is_flag=True, help="Also check the suffix-level identities.")
@click.pass_context
def covariance_cmd(ctx, scene, chain_name, state_name, isos, intermediate):
    """Check that relabeling every step algebra relabels the state over time."""
    sc = _load(ctx, scene)
    ch, rho = _get_chain_state(ctx, sc, chain_name, state_name)
    names = [n.strip() for n in isos.split(",") if n.strip()]
    try:
        iso_list = [sc.lookup("isomorphisms", n) for n in names]
    except SceneError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    tol = ctx.obj["tol"]
    try:
        rep = check_chain_covariance(ch, iso_list, rho, tol, check_intermediate=intermediate)
    except ValueError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    checks = [
        Check("state_covariance", rep.state_deviation, tol),
        Check("map_covariance", rep.map_deviation, tol),
    ]
    if rep.intermediate_deviation is not None:
        checks.append(Check("intermediate_covariance", rep.intermediate_deviation, tol))
    _emit(ctx, "covariance", checks, {"steps": len(ch)})


@main.command("bayes")
@click.option("--scene", required=True, type=click.Path())
@click.option("--channel", "channel_name", required=True)
@click.option("--state", "state_name", required=True)
@click.pass_context
def bayes_cmd(ctx, scene, channel_name, state_name):
    """Solve for the reverse channel and report its diagnostics."""
    sc = _load(ctx, scene)
    try:
        e = sc.lookup("channels", channel_name)
        rho = sc.lookup("states", state_name)
    except SceneError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    tol = ctx.obj["tol"]
    try:
        ebar, diag = solve_bayes(e, rho, tol)
    except ValueError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    checks = [Check("bayes_rule_residual", diag.residual, tol)]
    data = diag.as_dict()
    data["reverse_matrix"] = _matrix_json(ebar.matrix)
    _emit(ctx, "bayes", checks, data)


@main.command("bayes-covariance")
@click.option("--scene", required=True, type=click.Path())
@click.option("--channel", "channel_name", required=True)
@click.option("--state", "state_name", required=True)
@click.option("--phi", "phi_name", required=True, help="Isomorphism relabeling the source.")
@click.option("--psi", "psi_name", required=True, help="Isomorphism relabeling the target.")
@click.pass_context
def bayes_covariance_cmd(ctx, scene, channel_name, state_name, phi_name, psi_name):
    """Solve the Bayes rule, then check it is preserved by relabelings."""
    sc = _load(ctx, scene)
    try:
        e = sc.lookup("channels", channel_name)
        rho = sc.lookup("states", state_name)
        phi = sc.lookup("isomorphisms", phi_name)
        psi = sc.lookup("isomorphisms", psi_name)
    except SceneError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    tol = ctx.obj["tol"]
    try:
        ebar, diag = solve_bayes(e, rho, tol)
        rep = check_bayes_covariance(e, rho, ebar, phi, psi, tol)
    except ValueError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    checks = [
        Check("bayes_rule_residual", diag.residual, tol),
        Check("relabeled_bayes_rule", rep.conclusion_deviation, tol),
    ]
    _emit(ctx, "bayes-covariance", checks, {"vacuous": rep.vacuous})


@main.command("lvn")
@click.option("--scene", required=True, type=click.Path())
@click.option("--hamiltonian", "h_name", required=True)
@click.option("--state", "state_name", required=True)
@click.option("--durations", required=True, help="Comma-separated step durations.")
@click.option("--unitary", "u_name", default=None, help="Optional frame-change unitary.")
@click.pass_context
def lvn_cmd(ctx, scene, h_name, state_name, durations, u_name):
    """Discretize Hamiltonian evolution into a unitary chain and verify it.

    Checks the composite propagator against the single exponential of the
    total time, the marginal property, and (with --unitary) that the
    frame-changed chain produces the frame-changed state over time.
    """
    sc = _load(ctx, scene)
    try:
        h = sc.lookup("operators", h_name)
        rho = sc.lookup("states", state_name)
    except SceneError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)
    try:
        steps = [float(t) for t in durations.split(",") if t.strip()]
    except ValueError:
        click.echo("input error: --durations must be comma-separated numbers", err=True)
        ctx.exit(2)
    tol = ctx.obj["tol"]
    try:
        ch = unitary_chain(h, steps)
    except ValueError as err:
        click.echo(f"input error: {err}", err=True)
        ctx.exit(2)

    composite_dev = map_max_diff(ch.compose_all(), ad_unitary(evolution_unitary(h, sum(steps))))
    s = star(ch, rho, tol=max(tol, 1e-9))
    checks = [
        Check("composite_propagator", composite_dev, tol),
        Check("marginals", verify_marginals(s, tol).max_deviation, tol),
    ]
    data: dict = {"steps": len(steps), "total_time": sum(steps)}

    if u_name is not None:
        try:
            u = sc.lookup("operators", u_name)
        except SceneError as err:
            click.echo(f"input error: {err}", err=True)
            ctx.exit(2)
        if not u.is_unitary():
            click.echo(f"input error: operators.{u_name}: not unitary", err=True)
            ctx.exit(2)
        iso = StarIsomorphism(
            h.shape, h.shape, tuple(range(h.shape.num_blocks)), tuple(u.blocks)
        )
        h_prime = transform_hamiltonian(h, u)
        ch_prime = unitary_chain(h_prime, steps)
        lhs = tensor_iso([iso] * (len(steps) + 1)).apply(s.value.flatten())
        rhs = star(ch_prime, iso.apply(rho), tol=max(tol, 1e-9)).value.flatten()
        checks.append(Check("frame_change_covariance", max_abs_diff(lhs, rhs), tol))
        data["transformed_generator"] = _blocks_json(h_prime)

    _emit(ctx, "lvn", checks, data)


if __name__ == "__main__":
    main()
