"""Service endpoints orchestrating the simulation pipeline.

Stateless: every request carries its full configuration and the response
embeds a SHA-256 hash of the canonicalized request for provenance.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from oamid import analysis as _analysis
from oamid import counting as _counting
from oamid import jointspec as _jointspec
from oamid import masks as _masks
from oamid import oracle as _oracle
from oamid import projection as _projection
from oamid import spdc as _spdc
from oamid.lg import ModeGeometry
from oamid.projection import QuadratureError
from oamid.service import schemas as S


def config_hash(request: BaseModel) -> str:
    canonical = json.dumps(request.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def build_geometry(spec: S.GeometrySpec) -> ModeGeometry:
    return ModeGeometry(w0=spec.w0_um, l_max=spec.l_max)


def build_mask(spec, geometry: ModeGeometry) -> _masks.ObjectMask:
    if spec.kind == "empty":
        mask = _masks.uniform_mask(geometry, spec.transmittance)
    elif spec.kind == "cross":
        width = spec.width_um if spec.width_um is not None else \
            _masks.DEFAULT_STRIP_WIDTH_FACTOR * geometry.w0
        strip = _masks.StripSpec(width=width, angle=np.deg2rad(spec.angle_deg),
                                 transmittance=spec.transmittance)
        mask = _masks.make_cross(spec.arms, strip, spec.offsets_um or None, geometry)
    elif spec.kind == "half_plane":
        mask = _masks.half_plane(geometry)
    elif spec.kind == "sector":
        mask = _masks.SectorMask(geometry, np.deg2rad(spec.start_deg),
                                 np.deg2rad(spec.end_deg), spec.inside, spec.outside)
    elif spec.kind == "smooth_random":
        mask = _masks.random_smooth_mask(spec.seed, geometry, spec.n_terms, spec.max_harmonic)
    elif spec.kind == "raster":
        mask = _masks.load_raster(spec.path, phase_path=spec.phase_path,
                                  exterior=spec.exterior, l_max=geometry.l_max)
    else:  # pragma: no cover - pydantic discriminator prevents this
        raise ValueError(f"unknown mask kind {spec.kind!r}")
    if spec.rotation_deg:
        mask = _masks.rotate_mask(mask, np.deg2rad(spec.rotation_deg))
    return mask


def build_spectrum(spec: S.SpdcSpec, l_max: int) -> _spdc.NaturalSpectrum:
    if spec.file is not None:
        return _spdc.load_spectrum(spec.file, l_max)
    return _spdc.parametric_spectrum(spec.eta, l_max)


def _synthesized(geometry_spec, mask_spec, spdc_spec, parity_flip):
    geometry = build_geometry(geometry_spec)
    mask = build_mask(mask_spec, geometry)
    spectrum = build_spectrum(spdc_spec, geometry.l_max)
    matrix = _projection.operator_matrix(mask, geometry.l_max)
    js = _jointspec.synthesize(spectrum, matrix)
    if parity_flip:
        js = _jointspec.apply_parity_flip(js)
    return geometry, spectrum, matrix, js


def create_app() -> FastAPI:
    app = FastAPI(title="oamid", version="0.1.0",
                  description="Correlated-OAM object identification service")

    @app.exception_handler(ValueError)
    async def _value_error(request, exc):
        raise HTTPException(status_code=422, detail=str(exc))

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(request, exc):
        raise HTTPException(status_code=422, detail=str(exc))

    @app.exception_handler(QuadratureError)
    async def _quadrature_error(request, exc):
        raise HTTPException(status_code=500, detail=str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/spectrum", response_model=S.SpectrumResponse)
    def spectrum(req: S.SpectrumRequest):
        geometry, spectrum_, matrix, js = _synthesized(
            req.geometry, req.mask, req.spdc, req.parity_flip)
        report = _analysis.symmetry_report(
            js, pump_oam=req.analysis.l_p, threshold=req.analysis.threshold,
            ratio_pairs=[tuple(p) for p in req.analysis.ratio_pairs])
        return S.SpectrumResponse(
            config_sha256=config_hash(req),
            l_max=geometry.l_max,
            parity_flip=js.parity_flip,
            joint_spectrum=js.to_json_dict(),
            diagonal_sums={str(m): v for m, v in
                           _jointspec.diagonal_sums(js, req.analysis.l_p).items()},
            cross_section_lr0=_jointspec.cross_section(js, 0).tolist(),
            symmetry=report.to_json_dict(),
            operator_meta=matrix.quadrature_meta,
            total_rate=js.total_rate(),
        )

    @app.post("/simulate", response_model=S.SimulateResponse)
    def simulate(req: S.SimulateRequest):
        geometry, spectrum_, matrix, js = _synthesized(
            req.geometry, req.mask, req.spdc, req.parity_flip)
        time_s = req.measurement.time_s
        if req.match_reference_counts:
            empty = _projection.operator_matrix(
                _masks.uniform_mask(geometry), geometry.l_max)
            reference = _jointspec.synthesize(spectrum_, empty)
            time_s = _counting.adjust_integration_time(js, reference, time_s)
        plan = None
        plan_summary = None
        if req.plan.cells is not None:
            plan = _counting.MeasurementPlan(tuple(tuple(c) for c in req.plan.cells),
                                             req.plan.budget or len(req.plan.cells))
            plan_summary = plan.summary(time_s, req.measurement.runs)
        table = _counting.simulate_counts(js, req.measurement.rate_scale, time_s,
                                          req.measurement.runs, req.measurement.seed,
                                          plan=plan)
        return S.SimulateResponse(
            config_sha256=config_hash(req),
            integration_time_s=time_s,
            table=table.to_json_dict(),
            plan_summary=plan_summary,
        )

    @app.post("/identify", response_model=S.IdentifyResponse)
    def identify(req: S.IdentifyRequest):
        geometry = build_geometry(req.geometry)
        spectrum_ = build_spectrum(req.spdc, geometry.l_max)
        candidates = []
        for entry in req.library:
            mask = build_mask(entry.mask, geometry)
            candidates.append((entry.id, _projection.operator_matrix(mask, geometry.l_max)))
        plan = _counting.plan_measurements([m for _, m in candidates], spectrum_,
                                           req.budget, req.strategy,
                                           req.measurement.seed)
        meas = req.measurement
        if req.counts is not None:
            table = _table_from_json(req.counts)
        else:
            truth_mask = build_mask(req.truth, geometry)
            truth_js = _jointspec.synthesize(
                spectrum_, _projection.operator_matrix(truth_mask, geometry.l_max))
            table = _counting.simulate_counts(truth_js, meas.rate_scale, meas.time_s,
                                              meas.runs, meas.seed, plan=plan)
        result = _analysis.identify(table, plan, candidates, spectrum_,
                                    expected_scale=meas.rate_scale * table.integration_time)
        return S.IdentifyResponse(
            config_sha256=config_hash(req),
            plan=list(plan.cells),
            plan_summary=plan.summary(table.integration_time, table.runs),
            result=result.to_json_dict(),
        )

    @app.post("/oracle-check", response_model=S.OracleCheckResponse)
    def oracle_check(req: S.OracleCheckRequest):
        geometry = build_geometry(req.geometry)
        mask = build_mask(req.mask, geometry)
        report = _oracle.check_factorization(mask, req.l_max)
        selection = None
        if req.selection_rule_m is not None:
            selection = _oracle.check_selection_rule(mask, req.selection_rule_m, req.l_max)
        return S.OracleCheckResponse(
            config_sha256=config_hash(req),
            report=report.to_json_dict(),
            selection_rule_ok=selection,
        )

    return app


def _table_from_json(data: dict) -> _counting.CountTable:
    l_max = int(data["l_max"])
    runs = int(data["runs"])
    n = 2 * l_max + 1
    counts = np.zeros((runs, n, n), dtype=np.int64)
    measured = np.zeros((n, n), dtype=bool)
    for cell in data["cells"]:
        i, j = int(cell["l_r"]) + l_max, int(cell["l_o"]) + l_max
        counts[:, i, j] = np.asarray(cell["counts"], dtype=np.int64)
        measured[i, j] = True
    return _counting.CountTable(counts, l_max, float(data["integration_time_s"]),
                                runs, measured, meta=dict(data.get("meta", {})))


app = create_app()
