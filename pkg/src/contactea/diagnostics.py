"""Conserved quantities, the BKM integral and time-series output."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from .contact import ContactModel, ModelKind, reeb_derivative
from .spectral import ScalarField

CSV_COLUMNS = ("t", "c0", "c1", "cm1_plus", "cm1_neg", "bkm", "reeb_f_linf", "m_linf", "m_min")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float = 0.0
    c0: float = 0.0
    c1: float = 0.0
    c_minus_plus: float = 0.0
    c_minus_neg: float = 0.0
    bkm_integral: float = 0.0
    reeb_f_linf: float = 0.0
    m_linf: float = 0.0
    m_min: float = 0.0
    # C_{-1} is only meaningful when m is sign-definite.
    cm1_valid: bool = True

    def row(self) -> list[str]:
        vals = (self.t, self.c0, self.c1, self.c_minus_plus, self.c_minus_neg,
                self.bkm_integral, self.reeb_f_linf, self.m_linf, self.m_min)
        return [f"{v:.17g}" for v in vals]


def casimir_exponent(n: int) -> float:
    return (n + 1) / (n + 2)


def conserved_quantities(model: ContactModel | None, m: ScalarField, f: ScalarField,
                         n: int) -> DiagnosticsRecord:
    """C_0 = int m, C_1 = int m f and C_{-1,+-} = int m_{+-}^r with r = (n+1)/(n+2)."""
    if m.grid != f.grid:
        raise ValueError("m and f must share a grid")
    dv = m.grid.cell_volume
    v = m.values
    r = casimir_exponent(n)
    mp = np.maximum(v, 0.0)
    mn = np.maximum(-v, 0.0)
    mmin, mmax = float(v.min()), float(v.max())
    return DiagnosticsRecord(
        c0=float(v.sum() * dv),
        c1=float(np.sum(v * f.values) * dv),
        c_minus_plus=float(np.sum(mp**r) * dv),
        c_minus_neg=float(np.sum(mn**r) * dv),
        m_linf=float(np.max(np.abs(v))),
        m_min=mmin,
        cm1_valid=bool(mmin > 0 or mmax < 0),
    )


def bkm_update(record: DiagnosticsRecord, model: ContactModel, f: ScalarField,
               dt: float) -> DiagnosticsRecord:
    """Left-endpoint update of the accumulated ``int ||E(f)||_inf dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    linf = reeb_derivative(model, f).max_abs()
    return replace(record, t=record.t + dt, bkm_integral=record.bkm_integral + dt * linf,
                   reeb_f_linf=linf)


def quanto_invariance(model: ContactModel, f: ScalarField) -> float:
    """``||E(f)||_inf``: zero exactly when f generates a quantomorphism."""
    if model.kind is not ModelKind.TORUS3:
        raise ValueError("quanto_invariance probe is defined on torus3")
    return reeb_derivative(model, f).max_abs()


def make_record(eq, state, bkm: float, tendency) -> DiagnosticsRecord:
    """Full record for a simulation state given its stage-1 tendency."""
    f = ScalarField(state.m.grid, tendency.f)
    rec = conserved_quantities(getattr(eq, "model", None), state.m, f, eq.n)
    return replace(rec, t=state.t, bkm_integral=bkm,
                   reeb_f_linf=float(np.max(np.abs(tendency.reeb))))


def write_csv(records: Iterable[DiagnosticsRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(rec.row()) + "\n")


def read_csv(path: str | Path) -> list[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    names = ("t", "c0", "c1", "c_minus_plus", "c_minus_neg", "bkm_integral",
             "reeb_f_linf", "m_linf", "m_min")
    return [DiagnosticsRecord(**{n: float(r[c]) for n, c in zip(names, CSV_COLUMNS)})
            for r in rows]


def trapezoid_bkm(records: list[DiagnosticsRecord]) -> float:
    """Recompute the BKM integral from the logged ``reeb_f_linf`` series."""
    t = np.array([r.t for r in records])
    y = np.array([r.reeb_f_linf for r in records])
    return float(np.trapezoid(y, t)) if hasattr(np, "trapezoid") else float(np.trapz(y, t))
