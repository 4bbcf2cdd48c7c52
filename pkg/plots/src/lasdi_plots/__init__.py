"""Figure rendering for lasdi CSV artifacts; no numerical computation."""

from .reader import (CsvFormatError, read_heatmap, read_latent, read_profile,
                     read_range_bars, read_sv_decay)
from .render import (plot_heatmap, plot_latent, plot_profile,
                     plot_range_bars, plot_sv_decay)

__all__ = [
    "CsvFormatError", "read_heatmap", "read_latent", "read_profile",
    "read_range_bars", "read_sv_decay", "plot_heatmap", "plot_latent",
    "plot_profile", "plot_range_bars", "plot_sv_decay",
]
