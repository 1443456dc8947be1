"""Pydantic request/response models for the service API."""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator


class GeometrySpec(BaseModel):
    w0_um: float = Field(210.0, gt=0, description="beam waist in micrometers")
    l_max: int = Field(12, ge=1, le=30, description="OAM truncation order")


class MaskBase(BaseModel):
    rotation_deg: float = 0.0


class EmptyMaskSpec(MaskBase):
    kind: Literal["empty"] = "empty"
    transmittance: float = Field(1.0, ge=0, le=1)


class CrossMaskSpec(MaskBase):
    kind: Literal["cross"] = "cross"
    arms: int = Field(..., ge=1, le=6)
    width_um: Optional[float] = Field(None, gt=0, description="defaults to 0.83 * w0")
    angle_deg: float = 0.0
    offsets_um: list[float] = Field(default_factory=list,
                                    description="signed per-arm centerline offsets")
    transmittance: float = Field(0.0, ge=0, le=1)


class HalfPlaneMaskSpec(MaskBase):
    kind: Literal["half_plane"] = "half_plane"


class SectorMaskSpec(MaskBase):
    kind: Literal["sector"] = "sector"
    start_deg: float = 0.0
    end_deg: float = 180.0
    inside: float = Field(1.0, ge=0, le=1)
    outside: float = Field(0.0, ge=0, le=1)


class SmoothRandomMaskSpec(MaskBase):
    kind: Literal["smooth_random"] = "smooth_random"
    seed: int = 0
    n_terms: int = Field(4, ge=1, le=16)
    max_harmonic: int = Field(5, ge=0, le=12)


class RasterMaskSpec(MaskBase):
    kind: Literal["raster"] = "raster"
    path: str
    phase_path: Optional[str] = None
    exterior: float = Field(1.0, ge=0, le=1)


MaskSpec = Annotated[
    Union[EmptyMaskSpec, CrossMaskSpec, HalfPlaneMaskSpec, SectorMaskSpec,
          SmoothRandomMaskSpec, RasterMaskSpec],
    Field(discriminator="kind"),
]


class SpdcSpec(BaseModel):
    eta: Optional[float] = Field(0.7, gt=0, lt=1)
    file: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        if self.file is not None:
            self.eta = None
        elif self.eta is None:
            raise ValueError("either eta or file must be given")
        return self


class MeasurementSpec(BaseModel):
    rate_scale: float = Field(1e6, gt=0, description="counts/sec at unit rate")
    time_s: float = Field(1.0, gt=0)
    runs: int = Field(4, ge=1)
    seed: int = 0


class AnalysisSpec(BaseModel):
    l_p: int = 0
    threshold: float = Field(0.05, gt=0, lt=1)
    ratio_pairs: list[tuple[int, int]] = Field(default_factory=list)


class SpectrumRequest(BaseModel):
    geometry: GeometrySpec = GeometrySpec()
    mask: MaskSpec = Field(default_factory=EmptyMaskSpec)
    spdc: SpdcSpec = SpdcSpec()
    analysis: AnalysisSpec = AnalysisSpec()
    parity_flip: bool = False


class SpectrumResponse(BaseModel):
    config_sha256: str
    l_max: int
    parity_flip: bool
    joint_spectrum: dict
    diagonal_sums: dict
    cross_section_lr0: list[float]
    symmetry: dict
    operator_meta: dict
    total_rate: float


class PlanSpec(BaseModel):
    cells: Optional[list[tuple[int, int]]] = None  # explicit cells, or None = full grid
    budget: Optional[int] = Field(None, ge=1)
    strategy: Literal["greedy", "random"] = "greedy"


class SimulateRequest(BaseModel):
    geometry: GeometrySpec = GeometrySpec()
    mask: MaskSpec = Field(default_factory=EmptyMaskSpec)
    spdc: SpdcSpec = SpdcSpec()
    measurement: MeasurementSpec = MeasurementSpec()
    plan: PlanSpec = PlanSpec()
    parity_flip: bool = False
    match_reference_counts: bool = Field(
        False, description="rescale integration time so totals match the no-object case")


class SimulateResponse(BaseModel):
    config_sha256: str
    integration_time_s: float
    table: dict
    plan_summary: Optional[dict] = None


class LibraryEntry(BaseModel):
    id: str
    mask: MaskSpec


class IdentifyRequest(BaseModel):
    geometry: GeometrySpec = GeometrySpec()
    spdc: SpdcSpec = SpdcSpec()
    library: list[LibraryEntry] = Field(..., min_length=2)
    truth: Optional[MaskSpec] = None
    counts: Optional[dict] = Field(
        None, description="pre-measured count table (JSON form) instead of simulating")
    budget: int = Field(15, ge=1)
    strategy: Literal["greedy", "random"] = "greedy"
    measurement: MeasurementSpec = MeasurementSpec()

    @model_validator(mode="after")
    def _truth_or_counts(self):
        if self.truth is None and self.counts is None:
            raise ValueError("either truth (to simulate) or counts must be given")
        return self


class IdentifyResponse(BaseModel):
    config_sha256: str
    plan: list[tuple[int, int]]
    plan_summary: dict
    result: dict


class OracleCheckRequest(BaseModel):
    geometry: GeometrySpec = GeometrySpec()
    mask: MaskSpec = Field(default_factory=EmptyMaskSpec)
    l_max: int = Field(6, ge=1, le=6)
    selection_rule_m: Optional[int] = Field(None, ge=1)


class OracleCheckResponse(BaseModel):
    config_sha256: str
    report: dict
    selection_rule_ok: Optional[bool] = None
