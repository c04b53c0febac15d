"""Command-line interface.

Exit codes: 0 ok, 1 verification failure, 2 cap or configuration error,
3 inapplicable request, 4 certificate failure, 5 under-resolved quadrature.
"""

from __future__ import annotations

import json
import time
import warnings
from functools import wraps
from importlib import resources

import click

from .expander import ExpansionCapError, ExpansionRequest, expand
from .groups import (
    GroupCapError,
    GroupError,
    improper_representative,
    invariant_space_closed_form,
    parse_group,
    typed_basis,
)
from .tensors import MAX_BASIS_ORDER, build_basis_W, format_tensor

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_INAPPLICABLE, EXIT_CERTIFICATE, EXIT_UNDERRESOLVED = range(6)


def load_schema() -> dict:
    return json.loads(resources.files("symexpand").joinpath("schema/termlist.json").read_text())


def dump_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    raise click.exceptions.Exit(code)


def _note(message: str):
    click.echo(message, err=True)


# ---------------------------------------------------------------------------
# Text renderings; each is a function of the JSON document only


def text_basis(doc) -> str:
    lines = [f"order {doc['order']}: {len(doc['tensors'])} tensors"]
    lines += [f"W{doc['order']}_{t['index']} = {t['monomial']}" for t in doc["tensors"]]
    return "\n".join(lines) + "\n"


def text_invariants(doc) -> str:
    lines = [f"{doc['group']} invariants of order {doc['order']}: {len(doc['tensors'])}"]
    lines += [f"{t['label']} = {t['monomial']}" for t in doc["tensors"]]
    return "\n".join(lines) + "\n"


def text_types(doc) -> str:
    rows = doc["rows"]
    if not rows:
        return ""
    width = max(len(r["label"]) for r in rows)
    return "".join(f"{r['label'].ljust(width)}  {'+1' if r['type'] > 0 else '-1'}\n" for r in rows)


def text_termlist(doc) -> str:
    req = doc["request"]
    head = (f"# {req['group']}, cluster {req['cluster']}, gradient {req['gradient']}, "
            f"max order {req['max_order']}{', orthogonal' if req['orthogonal'] else ''}: {len(doc['terms'])} terms")
    lines = [head] + [f"{t['index']:>3}  {t['rendering']}" for t in doc["terms"]]
    cert = doc["certificate"]
    if cert is not None:
        rank = "-" if cert["rank"] is None else cert["rank"]
        lines.append(f"# certificate ({cert['method']}): {cert['status']}, rank {rank} of {cert['expected']}"
                     + (f"; {cert['note']}" if cert["note"] else ""))
    return "\n".join(lines) + "\n"


def text_verify(doc) -> str:
    lines = [f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}" + (f"  ({c['detail']})" if c["detail"] else "")
             for c in doc["checks"]]
    lines.append(f"suite {doc['suite']}: {'passed' if doc['passed'] else 'FAILED'}")
    return "\n".join(lines) + "\n"


def text_projection(doc) -> str:
    lines = [f"kernel {doc['kernel']}, gradient {doc['gradient']}, max order {doc['max_order']}, "
             f"grid {'x'.join(map(str, doc['grid']))}"]
    width = max((len(t["label"]) for t in doc["terms"]), default=4)
    lines.append(f"{'term'.ljust(width)}  coefficient")
    lines += [f"{t['label'].ljust(width)}  {t['coefficient']: .6e}" for t in doc["terms"]]
    lines.append("n  residual")
    lines += [f"{r['n']}  {r['residual']:.6e}" for r in doc["residuals"]]
    if doc["refinement_defect"] is not None:
        lines.append(f"resolution check: coefficients move by {doc['refinement_defect']:.3e} on a coarser grid")
    for p in doc.get("planted") or []:
        lines.append(f"planted {p['label']}: expected {p['expected']: .10e}, recovered {p['recovered']: .10e}, "
                     f"error {p['error']:.2e}")
    return "\n".join(lines) + "\n"


def emit(doc, fmt: str, output, text_fn):
    body = dump_json(doc) if fmt == "json" else text_fn(doc)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        click.echo(body, nl=False)


# ---------------------------------------------------------------------------
# Option plumbing


class GroupType(click.ParamType):
    name = "group"

    def convert(self, value, param, ctx):
        if not isinstance(value, str):
            return value
        try:
            return parse_group(value)
        except GroupError as exc:
            self.fail(str(exc), param, ctx)


GROUP = GroupType()


def output_options(f):
    @click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
    @click.option("--output", type=click.Path(dir_okay=False, writable=True), default=None,
                  help="Write the document here instead of stdout.")
    @wraps(f)
    def inner(*args, **kwargs):
        return f(*args, **kwargs)

    return inner


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def cli():
    """Symmetry-consistent expansion of orientation-dependent kernels."""


# ---------------------------------------------------------------------------
# basis / invariants / types


@cli.command()
@click.option("--order", "k", type=click.IntRange(min=0), required=True)
@output_options
def basis(k, fmt, output):
    """The 2k+1 orthogonal symmetric traceless basis tensors of order k."""
    if k > MAX_BASIS_ORDER:
        _fail(f"order {k} exceeds the cap {MAX_BASIS_ORDER}", EXIT_CONFIG)
    tensors = [{"index": i, "monomial": format_tensor(t)} for i, t in enumerate(build_basis_W(k))]
    doc = {"schema_version": SCHEMA_VERSION, "kind": "basis", "order": k, "tensors": tensors}
    emit(doc, fmt, output, text_basis)


@cli.command()
@click.option("--group", "spec", type=GROUP, required=True)
@click.option("--order", "l", type=click.IntRange(min=0), required=True)
@output_options
def invariants(spec, l, fmt, output):
    """Basis of the tensors of order l invariant under the group's rotations."""
    try:
        named = invariant_space_closed_form(spec.proper(), l)
    except GroupCapError as exc:
        _fail(str(exc), EXIT_CONFIG)
    tensors = [{"label": n.label, "monomial": format_tensor(n.tensor)} for n in named]
    doc = {"schema_version": SCHEMA_VERSION, "kind": "invariants", "group": spec.name, "order": l,
           "tensors": tensors}
    emit(doc, fmt, output, text_invariants)


@cli.command()
@click.option("--group", "spec", type=GROUP, required=True)
@click.option("--max-order", "n", type=click.IntRange(min=0), required=True)
@output_options
def types(spec, n, fmt, output):
    """Invariant tensors up to order n with their type under the improper representative."""
    if not spec.has_improper:
        _fail(f"{spec.name} contains no improper rotations, so tensor types are undefined", EXIT_INAPPLICABLE)
    try:
        rows = [{"label": t.label, "order": t.tensor.order, "type": t.type_sign} for t in typed_basis(spec, n)]
    except GroupCapError as exc:
        _fail(str(exc), EXIT_CONFIG)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "types", "group": spec.name, "max_order": n,
           "representative": [[str(x) for x in row] for row in improper_representative(spec).rows],
           "rows": rows}
    emit(doc, fmt, output, text_types)


# ---------------------------------------------------------------------------
# expand


def _term_record(index, et) -> dict:
    st = dict(et.structure)
    tensors = st.pop("tensors")
    eps = st.pop("eps")
    return {"index": index, "cluster": et.cluster, "k": et.k, "tensors": tensors, "eps": eps,
            "pattern": st, "rendering": et.rendering}


def _certificate(terms) -> dict:
    from .exactscalar import QuadScalar
    from .terms import certify

    n = len(terms)
    for t in terms:
        for s in _slots(t):
            if any(isinstance(c, QuadScalar) and not c.is_rational() for c in s.tensor.coeffs.values()):
                return {"method": "schur", "status": "skipped", "rank": None, "expected": n,
                        "note": "irrational invariant tensors are not certified"}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cert = certify(terms)
    if cert.rank < 0:
        note = "; ".join(cert.notes) or "; ".join(str(w.message) for w in caught)
        return {"method": cert.method, "status": "skipped", "rank": None, "expected": n, "note": note}
    return {"method": cert.method, "status": "passed" if cert.passed else "failed", "rank": cert.rank,
            "expected": cert.expected, "diagonal": cert.is_diagonal(), "note": ""}


def _slots(term):
    from .expander import term_slots

    return term_slots(term)


@cli.command(name="expand")
@click.option("--group", "spec", type=GROUP, required=True)
@click.option("--cluster", type=int, default=2, show_default=True, help="Number of molecules: 2, 3 or 4.")
@click.option("--gradient", "k", type=int, default=0, show_default=True, help="Gradient order k.")
@click.option("--max-order", "n", type=int, default=2, show_default=True, help="Largest tensor order.")
@click.option("--orthogonal", is_flag=True, help="Use the traceless-completed orthogonal two-body terms.")
@click.option("--certify", "do_certify", is_flag=True, help="Embed an exact Gram-rank certificate.")
@output_options
def expand_cmd(spec, cluster, k, n, orthogonal, do_certify, fmt, output):
    """Symmetry-consistent term list for a molecular point group."""
    req = ExpansionRequest(spec, cluster, k, n, orthogonal)
    try:
        req.validate()
        terms = expand(req)
    except (ExpansionCapError, GroupCapError) as exc:
        _fail(str(exc), EXIT_CONFIG)
    cert = _certificate([t.term for t in terms]) if do_certify else None
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "termlist",
        "request": {"group": spec.name, "cluster": cluster, "gradient": k, "max_order": n, "orthogonal": orthogonal},
        "terms": [_term_record(i, t) for i, t in enumerate(terms)],
        "certificate": cert,
    }
    emit(doc, fmt, output, text_termlist)
    if cert is not None:
        if cert["status"] == "skipped":
            _note(f"certificate skipped: {cert['note']}")
        elif cert["status"] == "failed":
            _fail(f"Gram rank {cert['rank']} is below the term count {cert['expected']}", EXIT_CERTIFICATE)


# ---------------------------------------------------------------------------
# verify


@cli.command()
@click.option("--suite", type=click.Choice(["appendixE", "counts", "m4-selection", "orthogonality", "groups",
                                            "haar", "all"]), default="all", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@output_options
def verify(suite, seed, fmt, output):
    """Run an exact self-verification suite."""
    from .suites import run_suite

    checks, seconds = run_suite(suite, seed)
    failed = next((c for c in checks if not c.passed), None)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "verify", "suite": suite, "seed": seed,
           "passed": failed is None, "first_failure": None if failed is None else failed.name,
           "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]}
    emit(doc, fmt, output, text_verify)
    _note(f"{len(checks)} checks in {seconds:.1f} s")
    if failed is not None:
        _fail(f"check failed: {failed.name}", EXIT_VERIFY)


# ---------------------------------------------------------------------------
# project


def _parse_grid(value):
    from .kernelproj import QuadratureGrid

    if value is None:
        return QuadratureGrid()
    try:
        counts = [int(x) for x in value.split(",")]
    except ValueError:
        counts = []
    if len(counts) != 6 or min(counts) < 2:
        raise click.BadParameter("expected six integers >= 2: n_r,n_theta,n_phi,n_alpha,n_beta,n_gamma")
    return QuadratureGrid(*counts)


@cli.command()
@click.option("--kernel", "kernel_name", required=True,
              help="Built-in kernel name or a plug-in given as module:function.")
@click.option("--gradient", "k", type=int, default=0, show_default=True)
@click.option("--max-order", "n", type=int, default=2, show_default=True)
@click.option("--grid", default=None, help="n_r,n_theta,n_phi,n_alpha,n_beta,n_gamma (default 16,8,16,24,48,48).")
@click.option("--no-resolution-check", is_flag=True, help="Skip the comparison against a coarser grid.")
@click.option("--figure", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Also write a PNG of residual against truncation order.")
@output_options
def project(kernel_name, k, n, grid, no_resolution_check, figure, fmt, output):
    """Project a two-body kernel's moment onto the orthogonal term basis."""
    from . import kernelproj as kp

    try:
        grid_obj = _parse_grid(grid)
    except click.BadParameter as exc:
        _fail(str(exc), EXIT_CONFIG)
    try:
        kernel = kp.load_plugin(kernel_name) if ":" in kernel_name else kp.builtin_kernel(kernel_name)
        t0 = time.perf_counter()
        rep = kp.project(kernel, k, n, grid_obj, check_refinement=not no_resolution_check)
    except kp.UnderResolvedError as exc:
        _fail(str(exc), EXIT_UNDERRESOLVED)
    except (kp.KernelError, ValueError) as exc:
        _fail(str(exc), EXIT_CONFIG)
    planted = None
    if kernel.planted and k == 0:
        g0 = kp.radial_bump_integral(kernel.radius)
        planted = []
        for term, c in kernel.planted.items():
            got = rep.coefficient(term.label())
            planted.append({"label": term.label(), "planted": c, "expected": c * g0, "recovered": got,
                            "error": abs(got - c * g0)})
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "projection",
        "kernel": rep.kernel,
        "gradient": k,
        "max_order": n,
        "grid": list(rep.grid),
        "terms": rep.terms,
        "residuals": [{"n": m, "residual": r} for m, r in rep.residuals],
        "moment_norm": rep.moment_norm,
        "refinement_defect": rep.refinement_defect,
        "planted": planted,
    }
    emit(doc, fmt, output, text_projection)
    if figure:
        kp.plot_residuals(rep, figure)
    _note(f"projection took {time.perf_counter() - t0:.1f} s")


def main(argv=None):
    return cli.main(args=argv, prog_name="symexpand")


if __name__ == "__main__":
    main()
