"""Command-line client for the synthesis service.

Every subcommand issues one request against the FastAPI application --
in-process by default, or a remote instance via --url.  Exit codes:
0 success, 1 usage, 2 I/O, 3 format, 4 not found within the bound (or
failed verification), 5 resource budget.
"""

from __future__ import annotations

import json
import sys

import click
import httpx

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_FORMAT = 3
EXIT_NOT_FOUND = 4
EXIT_RESOURCE = 5

_ERROR_EXITS = {"usage": EXIT_USAGE, "io": EXIT_IO, "format": EXIT_FORMAT,
                "resource": EXIT_RESOURCE}


class ClientError(click.ClickException):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


class ServiceClient:
    def __init__(self, url: str | None):
        if url:
            self._client = httpx.Client(base_url=url, timeout=None)
        else:
            from .service import create_app

            self._client = httpx.Client(
                transport=httpx.ASGITransport(app=create_app()),
                base_url="http://mitmsynth.local",
                timeout=None,
            )

    def post(self, path: str, payload: dict) -> dict:
        try:
            resp = self._client.post(path, json=payload)
        except httpx.HTTPError as e:
            raise ClientError(f"cannot reach service: {e}", EXIT_IO) from None
        body = resp.json()
        if resp.status_code >= 400:
            err = body.get("error")
            if err:
                raise ClientError(err["detail"], _ERROR_EXITS.get(err["code"], EXIT_USAGE))
            raise ClientError(f"service error {resp.status_code}: {body}", EXIT_USAGE)
        return body


def _read_file(path: str) -> str:
    try:
        with open(path) as f:
            return f.read()
    except OSError as e:
        raise ClientError(f"cannot read {path}: {e}", EXIT_IO) from None


def _write_file(path: str, text: str) -> None:
    try:
        with open(path, "w") as f:
            f.write(text)
    except OSError as e:
        raise ClientError(f"cannot write {path}: {e}", EXIT_IO) from None


def _target_payload(name: str | None, matrix_path: str | None) -> dict:
    if (name is None) == (matrix_path is None):
        raise ClientError("specify exactly one of --target or --matrix", EXIT_USAGE)
    if name is not None:
        return {"name": name}
    try:
        return {"matrix": json.loads(_read_file(matrix_path))}
    except json.JSONDecodeError as e:
        raise ClientError(f"{matrix_path}: bad JSON: {e}", EXIT_FORMAT) from None


@click.group()
@click.option("--url", default=None, help="Remote service URL (default: run in-process).")
@click.pass_context
def main(ctx, url):
    """Depth-optimal exact synthesis of small Clifford+T circuits."""
    ctx.obj = ServiceClient(url)


@main.command()
@click.option("-n", "--qubits", "n", type=int, required=True)
@click.option("-d", "--depth", type=int, required=True)
@click.option("--gate-set", default="clifford_t", show_default=True)
@click.option("--mode", type=click.Choice(["classed", "full"]), default="classed",
              show_default=True)
@click.option("-o", "--out", default=None, help="Output database path.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.pass_obj
def gen(client: ServiceClient, n, depth, gate_set, mode, out, jobs):
    """Generate a minimal-depth circuit database and write it to disk."""
    out = out or f"{n}q-d{depth}-{mode}.qcdb"
    body = client.post("/gen", {"n": n, "depth": depth, "gate_set": gate_set,
                                "mode": mode, "out": out, "jobs": jobs})
    click.echo(" ".join(str(c) for c in body["levels"]))
    for level, (count, secs) in enumerate(zip(body["levels"], body["seconds"]), start=1):
        click.echo(f"level {level}: {count} circuits, {secs:.3f}s", err=True)
    click.echo(f"wrote {body['path']}", err=True)


@main.command()
@click.option("--target", default=None, help="Named catalog target.")
@click.option("--matrix", default=None, help="JSON matrix file.")
@click.option("--db", required=True, help="Database path (service-side).")
@click.option("-d", "--max-depth", type=int, required=True)
@click.option("--tdepth", is_flag=True, help="Optimize T-depth instead of depth.")
@click.option("--ancillas", "-m", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--allow-large", is_flag=True, help="Permit the 3-qubit Clifford run.")
@click.option("-o", "--out", default=None, help="Write the found circuit here.")
@click.pass_obj
def search(client: ServiceClient, target, matrix, db, max_depth, tdepth, ancillas,
           jobs, allow_large, out):
    """Find a depth-, T-depth-, or ancilla-assisted-optimal circuit."""
    tgt = _target_payload(target, matrix)
    if tdepth and ancillas:
        raise ClientError("choose either --tdepth or --ancillas", EXIT_USAGE)
    if tdepth:
        body = client.post("/search/tdepth", {"target": tgt, "max_tdepth": max_depth,
                                              "allow_large": allow_large})
    elif ancillas:
        body = client.post("/search/ancilla", {"target": tgt, "ancillas": ancillas,
                                               "db": db, "max_depth": max_depth})
    else:
        body = client.post("/search", {"target": tgt, "db": db,
                                       "max_depth": max_depth, "jobs": jobs})
    total = sum(body["probe_seconds"].values())
    if not body["found"]:
        click.echo(
            f"not found: no circuit within bound {body['proof_bound']} "
            f"({total:.3f}s searched)"
        )
        sys.exit(EXIT_NOT_FOUND)
    click.echo(body["circuit"], nl=False)
    click.echo(
        f"depth {body['depth']}  t-depth {body['t_depth']}  "
        f"phase w^{body['phase_exponent']}  verified {body['verified']}  "
        f"search {total:.3f}s",
        err=True,
    )
    if out:
        _write_file(out, body["circuit"])


@main.command()
@click.option("--circuit", required=True, help="Circuit text file.")
@click.option("--target", default=None)
@click.option("--matrix", default=None)
@click.pass_obj
def verify(client: ServiceClient, circuit, target, matrix):
    """Check a circuit file against a target, exactly or up to phase."""
    body = client.post("/verify", {"circuit": _read_file(circuit),
                                   "target": _target_payload(target, matrix)})
    rel = body["relation"]
    msg = {
        "exact": "exact equality",
        "global_phase": f"equal up to global phase w^{body['phase_exponent']}",
        "ancilla_subspace": (
            f"equal on the ancilla-zero subspace up to w^{body['phase_exponent']}"
        ),
        "different": "NOT equivalent",
    }[rel]
    click.echo(f"{msg} (depth {body['depth']}, t-depth {body['t_depth']})")
    if rel == "different":
        sys.exit(EXIT_NOT_FOUND)


@main.command()
@click.option("--circuit", required=True, help="{CNOT, T} circuit text file.")
@click.option("-m", "--ancillas", type=int, required=True)
@click.option("--merge-phases", is_flag=True,
              help="Collapse repeated phase terms into P/Z gates.")
@click.option("-o", "--out", default=None)
@click.pass_obj
def tpar(client: ServiceClient, circuit, ancillas, merge_phases, out):
    """Parallelize the T stages of a {CNOT, T} circuit using ancillas."""
    body = client.post("/tpar", {"circuit": _read_file(circuit),
                                 "ancillas": ancillas, "merge_phases": merge_phases})
    click.echo(body["circuit"], nl=False)
    click.echo(
        f"t-count {body['t_count']}  t-depth {body['t_depth_before']} -> "
        f"{body['t_depth_after']}  stage bound {body['stage_bound']}",
        err=True,
    )
    if out:
        _write_file(out, body["circuit"])


@main.command()
@click.option("--circuit", required=True)
@click.option("--db", "dbs", multiple=True, required=True,
              help="Classed database path; repeat per width.")
@click.option("--window", type=int, default=4, show_default=True)
@click.option("--max-width", type=int, default=2, show_default=True)
@click.option("-o", "--out", default=None)
@click.pass_obj
def peephole(client: ServiceClient, circuit, dbs, window, max_width, out):
    """Re-synthesize small windows of a circuit against optimal databases."""
    body = client.post("/peephole", {"circuit": _read_file(circuit), "dbs": list(dbs),
                                     "window": window, "max_width": max_width})
    click.echo(body["circuit"], nl=False)
    click.echo(
        f"depth {body['depth_before']} -> {body['depth_after']}  "
        f"gates {body['gates_before']} -> {body['gates_after']}  "
        f"phase w^{body['phase_exponent']}",
        err=True,
    )
    if out:
        _write_file(out, body["circuit"])


@main.command()
@click.option("--circuit", required=True)
@click.pass_obj
def cost(client: ServiceClient, circuit):
    """Report gate counts and the controlled-version cost accounting."""
    body = client.post("/cost", {"circuit": _read_file(circuit)})
    h, p, c, t = body["cost_vector"]
    click.echo(f"cost H={h} P={p} CNOT={c} T={t}")
    ch, cp, cc, ct = body["controlled_cost"]
    click.echo(f"controlled cost H={ch} P={cp} CNOT={cc} T={ct}")
    click.echo(f"controlled t-depth bound {body['controlled_t_depth_bound']}")


@main.command()
@click.option("-n", "--qubits", "n", type=int, required=True)
@click.option("--allow-large", is_flag=True)
@click.pass_obj
def clifford(client: ServiceClient, n, allow_large):
    """Count the Clifford group elements up to global phase."""
    body = client.post("/clifford", {"n": n, "allow_large": allow_large})
    click.echo(str(body["count"]))
    click.echo(f"generated in {body['seconds']:.3f}s", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8037, show_default=True)
def serve(host, port):
    """Run the synthesis service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
