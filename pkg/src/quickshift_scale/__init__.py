"""Quickshift superpixels and closed-form predictions of their number."""

from .density import (Hyperparams, delta_field, density_P, density_P_at, density_Q,
                      hajek_projection, kernel_width, norm_constant, parse_dm)
from .graph import (NeighborhoodSpec, ParentGraph, build_graph_original,
                    build_graph_simplified, connected_components, count_local_maxima,
                    count_superpixels, local_maxima, shape_case)
from .harness import (ExperimentReport, Verdict, bicolor_check, downsample_box, evolution,
                      moments_check, pq_check, rescale_hyperparams, scale_params, scale_size,
                      segment)
from .pixels import (LabelMap, Region, cielab_to_rgb, load_image_lab, load_ppm,
                     rgb_to_cielab, save_labels, write_ppm)
from .rng import NoiseModel, normal_image, trial_seed
from .synthetic import BicolorModel, FlatModel, bicolor_image, flat_image
from .theory import (Prediction, circle_segment_area, expected_density_bicolor,
                     expected_density_flat, expected_local_maxima_asymptotic,
                     expected_local_maxima_exact, lattice_count, lattice_count_field, psi1, psi2,
                     rounded_square_area, variance_density_flat)

__version__ = "0.1.0"
