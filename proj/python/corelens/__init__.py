"""Reactor core data model, NRDF container, analysis tools and SVG views."""

from ._corelens import (
    CorelensError,
    Reactor,
    Series,
    dump,
    from_bytes,
    ingest_csv,
    kmeans,
    make_preset,
    open,
    pin_diff,
    render_assembly,
    render_core,
    render_plot,
    save,
)

__all__ = [
    "CorelensError",
    "Reactor",
    "Series",
    "dump",
    "from_bytes",
    "ingest_csv",
    "kmeans",
    "make_preset",
    "open",
    "pin_diff",
    "render_assembly",
    "render_core",
    "render_plot",
    "save",
]
