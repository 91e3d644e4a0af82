"""Bio-inspired texture (BiT) descriptor: an image channel read as an ecosystem
of gray-level species, summarized by biodiversity and taxonomic indices."""

from .biodiversity import (
    BiodiversityIndices,
    berger_parker,
    biodiversity_indices,
    fisher_alpha,
    kempton_taylor,
    margalef,
    mcintosh_evenness,
    menhinick,
    shannon_wiener,
)
from .descriptor import BiTVector, ExtractOptions, extract, feature_names
from .ecosystem import InvalidInputError, SpeciesHistogram, build_histogram, richness
from .taxonomy import PhyloTree, TaxonomicIndices, build_tree, distance_matrix, taxonomic_indices

__all__ = [
    "BiTVector",
    "BiodiversityIndices",
    "ExtractOptions",
    "InvalidInputError",
    "PhyloTree",
    "SpeciesHistogram",
    "TaxonomicIndices",
    "berger_parker",
    "biodiversity_indices",
    "build_histogram",
    "build_tree",
    "distance_matrix",
    "extract",
    "feature_names",
    "fisher_alpha",
    "kempton_taylor",
    "margalef",
    "mcintosh_evenness",
    "menhinick",
    "richness",
    "shannon_wiener",
    "taxonomic_indices",
]
