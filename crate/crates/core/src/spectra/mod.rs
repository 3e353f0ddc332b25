//! Essential spectra by regime, band algebra, property (P) and truncation
//! evidence for discrete accumulation.

mod bands;
mod edges;
mod essential;
mod hill;
mod lattice;
mod report;
mod sweep;

pub use bands::{Band, BandSet};
pub use edges::{
    classify_edges, required_flags, AccVerdict, Approach, EdgeClass, EdgeFlag, PStatus, SideCondition,
};
pub use essential::{
    essential_from_limits, essential_section, essential_union, half_line_essential, EssentialSection,
    EssentialSource, HalfLineEssential,
};
pub use hill::{hill_discriminant, period_cell, periodic_bands, PeriodicBands, HILL_RTOL};
pub use report::{
    build_spectrum_report, level_spectrum, piece_bands, ContainmentBox, LevelSpectrum, SpectrumConfig,
    SpectrumReport,
};
pub use lattice::{discrete_band_edge, fd_cell_eigenvalues};
pub use sweep::{accumulation_sweep, default_delta, piece_count, AccumulationEvidence};
