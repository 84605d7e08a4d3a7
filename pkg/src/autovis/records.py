"""Structured results passed between pipeline stages and persisted as artifacts."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class DataProfile:
    """What the profiling stage learned about an unknown volume."""

    object_keywords: list[str]
    object_type: str  # "empirical" | "simulated"
    best_rsv: float
    best_rsv_score: int
    best_initial_view: int
    rsv_candidates: list[float] = field(default_factory=list)
    rsv_scores: list[int] = field(default_factory=list)
    fallback_used: bool = False

    def to_dict(self) -> dict:
        return {
            "object_keywords": list(self.object_keywords),
            "object_type": self.object_type,
            "best_rsv": self.best_rsv,
            "best_rsv_score": self.best_rsv_score,
            "best_initial_view": self.best_initial_view,
            "rsv_candidates": list(self.rsv_candidates),
            "rsv_scores": list(self.rsv_scores),
            "fallback_used": self.fallback_used,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DataProfile":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


@dataclass
class IsovalueRecord:
    """Judgment for one sampled isovalue, plus its final color/opacity assignment."""

    isovalue: float
    geometric_role: str = "unknown"
    scientific_salience: int = 1
    occlusion_risk: int = 1
    confidence: int = 1
    shape_summary: str = ""
    explanation: str = ""
    assigned_color: tuple[float, float, float] = (1.0, 1.0, 1.0)
    assigned_opacity: float = 0.0
    accepted: bool = True
    tuned_isovalue: float | None = None

    @property
    def effective_isovalue(self) -> float:
        return self.isovalue if self.tuned_isovalue is None else self.tuned_isovalue

    def to_dict(self) -> dict:
        return {
            "isovalue": self.isovalue,
            "geometric_role": self.geometric_role,
            "scientific_salience": self.scientific_salience,
            "occlusion_risk": self.occlusion_risk,
            "confidence": self.confidence,
            "shape_summary": self.shape_summary,
            "explanation": self.explanation,
            "assigned_color": list(self.assigned_color),
            "assigned_opacity": self.assigned_opacity,
            "accepted": self.accepted,
            "tuned_isovalue": self.tuned_isovalue,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IsovalueRecord":
        d = dict(d)
        d["assigned_color"] = tuple(d.get("assigned_color", (1.0, 1.0, 1.0)))
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


@dataclass
class ViewSelection:
    """Viewpoint indices picked by the view-selection stage (post repair)."""

    ranked: list[int]
    anchors: list[int]
    avoid: list[int]
    fallback_used: bool = False

    def to_dict(self) -> dict:
        return {
            "ranked": list(self.ranked),
            "anchors": list(self.anchors),
            "avoid": list(self.avoid),
            "fallback_used": self.fallback_used,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ViewSelection":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})
