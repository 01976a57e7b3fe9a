"""FastAPI service wrapping the synthesis engine.

Database files and output paths are resolved on the service host.  Loaded
databases and Clifford sets are cached on the application state, so a
long-running service pays generation and load costs once.
"""

from __future__ import annotations

import os
import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..canon import phase_between
from ..cliffords import ResourceBudgetError, TDepthSets, clifford_generate
from ..db import CircuitDatabase, DbFormatError, generate
from ..gates import GATE_SETS
from ..matrix import RingMatrix
from ..phasepoly import extract, parallelize, theorem_stage_bound
from ..qcformat import CircuitFormatError, emit_circuit, parse_circuit
from ..search import (
    DatabaseTooShallowError,
    ancilla_search,
    controlled_cost,
    mitm_search,
    mitm_search_tdepth,
    peephole,
)
from ..targets import build_target
from . import schemas


class ServiceError(Exception):
    def __init__(self, code: str, detail: str, status: int):
        super().__init__(detail)
        self.code = code
        self.detail = detail
        self.status = status


def _usage(detail: str) -> ServiceError:
    return ServiceError("usage", detail, 400)


def _resolve_target(spec: schemas.TargetSpec) -> RingMatrix:
    if spec.name is not None:
        try:
            return build_target(spec.name)
        except KeyError as e:
            raise _usage(str(e.args[0])) from None
    try:
        return RingMatrix.from_json_dict(spec.matrix)
    except (KeyError, TypeError, ValueError) as e:
        raise ServiceError("format", f"bad matrix JSON: {e}", 422) from None


def _parse(text: str):
    try:
        return parse_circuit(text)
    except CircuitFormatError as e:
        raise ServiceError("format", str(e), 422) from None


def _load_db(app: FastAPI, path: str) -> CircuitDatabase:
    try:
        mtime = os.stat(path).st_mtime_ns
    except OSError as e:
        raise ServiceError("io", f"cannot read database {path}: {e}", 404) from None
    cache = app.state.dbs
    hit = cache.get(path)
    if hit and hit[0] == mtime:
        return hit[1]
    try:
        db = CircuitDatabase.load(path)
    except DbFormatError as e:
        raise ServiceError("format", f"{path}: {e} ({e.kind})", 422) from None
    except OSError as e:
        raise ServiceError("io", f"cannot read database {path}: {e}", 404) from None
    cache[path] = (mtime, db)
    return db


def _search_response(res) -> schemas.SearchResponse:
    return schemas.SearchResponse(
        found=res.found,
        depth=res.depth,
        t_depth=res.t_depth,
        phase_exponent=res.phase_exponent,
        circuit=emit_circuit(res.circuit) if res.found else None,
        proof_bound=res.proof_bound,
        probe_seconds={int(k): float(v) for k, v in res.probe_seconds.items()},
        verified=None,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="mitmsynth", version=__version__)
    app.state.dbs = {}
    app.state.cliffords = {}
    app.state.tdepth_sets = {}

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "detail": exc.detail}},
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/targets")
    def targets():
        from ..targets import CATALOG

        return {"targets": sorted(CATALOG)}

    @app.post("/gen", response_model=schemas.GenResponse)
    def gen(req: schemas.GenRequest):
        gs = GATE_SETS.get(req.gate_set)
        if gs is None:
            raise _usage(f"unknown gate set {req.gate_set!r}")
        if req.mode not in ("classed", "full"):
            raise _usage("mode must be classed or full")
        try:
            db = generate(req.n, gs, req.depth, mode=req.mode, jobs=req.jobs)
            db.save(req.out)
        except OSError as e:
            raise ServiceError("io", f"cannot write {req.out}: {e}", 404) from None
        except MemoryError as e:
            raise ServiceError("resource", f"out of memory: {e}", 503) from None
        return schemas.GenResponse(
            path=req.out, levels=db.counts(),
            seconds=[round(s, 3) for s in db.generation_seconds],
        )

    @app.post("/search", response_model=schemas.SearchResponse)
    def search(req: schemas.SearchRequest, request: Request):
        target = _resolve_target(req.target)
        db = _load_db(request.app, req.db)
        try:
            res = mitm_search(target, db, req.max_depth, jobs=req.jobs)
        except DatabaseTooShallowError as e:
            raise _usage(str(e)) from None
        except ValueError as e:
            raise _usage(str(e)) from None
        out = _search_response(res)
        if res.found:
            out.verified = res.verify_against(target)
        return out

    @app.post("/search/tdepth", response_model=schemas.SearchResponse)
    def search_tdepth(req: schemas.TdepthSearchRequest, request: Request):
        target = _resolve_target(req.target)
        n = target.n_qubits
        state = request.app.state
        try:
            if n not in state.cliffords:
                state.cliffords[n] = clifford_generate(n, allow_large=req.allow_large)
            if n not in state.tdepth_sets:
                state.tdepth_sets[n] = TDepthSets(state.cliffords[n])
            res = mitm_search_tdepth(
                target, state.cliffords[n], req.max_tdepth, sets=state.tdepth_sets[n]
            )
        except ResourceBudgetError as e:
            raise ServiceError("resource", str(e), 503) from None
        except ValueError as e:
            raise _usage(str(e)) from None
        out = _search_response(res)
        if res.found:
            out.verified = res.verify_against(target)
        return out

    @app.post("/search/ancilla", response_model=schemas.SearchResponse)
    def search_ancilla(req: schemas.AncillaSearchRequest, request: Request):
        target = _resolve_target(req.target)
        db = _load_db(request.app, req.db)
        try:
            res = ancilla_search(target, req.ancillas, db, req.max_depth)
        except DatabaseTooShallowError as e:
            raise _usage(str(e)) from None
        except ValueError as e:
            raise _usage(str(e)) from None
        out = _search_response(res)
        if res.found:
            big = RingMatrix.identity(req.ancillas).tensor(target) if req.ancillas else target
            ncols = 1 << target.n_qubits
            from ..search import _subcols_equal_up_to_phase

            p = _subcols_equal_up_to_phase(res.circuit.evaluate(), big, ncols)
            out.verified = p is not None and (-p) % 8 == res.phase_exponent
        return out

    @app.post("/verify", response_model=schemas.VerifyResponse)
    def verify(req: schemas.VerifyRequest):
        target = _resolve_target(req.target)
        circuit = _parse(req.circuit)
        u = circuit.evaluate()
        relation = "different"
        phase = None
        if circuit.n_qubits == target.n_qubits:
            p = phase_between(u, target)
            if p == 0:
                relation, phase = "exact", 0
            elif p is not None:
                relation, phase = "global_phase", p
        elif (
            circuit.n_ancillas
            and circuit.n_qubits - circuit.n_ancillas == target.n_qubits
        ):
            from ..search import _subcols_equal_up_to_phase

            big = RingMatrix.identity(circuit.n_ancillas).tensor(target)
            p = _subcols_equal_up_to_phase(u, big, 1 << target.n_qubits)
            if p is not None:
                relation, phase = "ancilla_subspace", (-p) % 8
        else:
            raise _usage(
                f"circuit acts on {circuit.n_qubits} wires but target needs "
                f"{target.n_qubits} (declare ancillas for subspace checks)"
            )
        return schemas.VerifyResponse(
            relation=relation, phase_exponent=phase,
            depth=circuit.depth, t_depth=circuit.t_depth(),
        )

    @app.post("/tpar", response_model=schemas.TparResponse)
    def tpar(req: schemas.TparRequest):
        circuit = _parse(req.circuit)
        try:
            pp = extract(circuit)
            out = parallelize(circuit, req.ancillas, merge_phases=req.merge_phases)
        except ValueError as e:
            raise _usage(str(e)) from None
        return schemas.TparResponse(
            circuit=emit_circuit(out),
            t_count=pp.t_count,
            t_depth_before=circuit.t_depth(),
            t_depth_after=out.t_depth(),
            stage_bound=theorem_stage_bound(pp.t_count, req.ancillas),
        )

    @app.post("/peephole", response_model=schemas.PeepholeResponse)
    def run_peephole(req: schemas.PeepholeRequest, request: Request):
        circuit = _parse(req.circuit)
        dbs = {}
        for path in req.dbs:
            db = _load_db(request.app, path)
            if db.mode != "classed":
                raise _usage(f"{path}: peephole needs classed-mode databases")
            dbs[db.n_qubits] = db
        before = circuit.scheduled()
        out, phase = peephole(circuit, dbs, window=req.window, max_width=req.max_width)
        return schemas.PeepholeResponse(
            circuit=emit_circuit(out),
            phase_exponent=phase,
            depth_before=before.depth,
            depth_after=out.depth,
            gates_before=before.gate_count(),
            gates_after=out.gate_count(),
        )

    @app.post("/cost", response_model=schemas.CostResponse)
    def cost(req: schemas.CostRequest):
        circuit = _parse(req.circuit)
        vec = circuit.cost_vector()
        ctrl, bound = controlled_cost(vec)
        return schemas.CostResponse(
            cost_vector=list(vec),
            controlled_cost=list(ctrl),
            controlled_t_depth_bound=bound,
        )

    @app.post("/clifford", response_model=schemas.CliffordResponse)
    def clifford(req: schemas.CliffordRequest, request: Request):
        t0 = time.perf_counter()
        state = request.app.state
        try:
            if req.n not in state.cliffords:
                state.cliffords[req.n] = clifford_generate(req.n, allow_large=req.allow_large)
        except ResourceBudgetError as e:
            raise ServiceError("resource", str(e), 503) from None
        return schemas.CliffordResponse(
            count=len(state.cliffords[req.n]), seconds=round(time.perf_counter() - t0, 3)
        )

    return app
