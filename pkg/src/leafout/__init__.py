"""Leaf-out origami grasping toolkit.

Rigid-origami kinematics of the leaf-out pattern, tailorable bistable
energy landscapes, drop-impact trigger prediction and exploration of
non-uniform multi-grasp folding modes, with a batch command line.
"""

__version__ = "0.1.0"

from .geometry import (CreaseId, CreaseKind, FoldedMesh, Frame,
                       LeafOutGeometry, build_geometry, geometry_to_json,
                       mesh_to_obj, reconstruct_mesh)
from .kinematics import (ClosureResidual, FoldState, FoldingPath,
                         LockedConfiguration, NotClosedError, StepFailure,
                         StepRequest, chain_product, constraint_matrix,
                         project_step, residual, trace_path)
from .unitcell import d_sub_d_main, sub_angle_from_main
from .uniform import (OutOfRangeError, UniformState, boundary_angle_from_psi,
                      boundary_vector, main_angle_from_psi, psi_motion_range,
                      uniform_path, uniform_state)
from .energy import (BistabilityReport, LandscapeCurve, RatioSurface,
                     SpringModel, characterize_bistability, energy_of_state,
                     landscape_over_psi, path_energies, ratio_surface)
from .droptest import (DropScenario, TriggerMap, TriggerPrediction,
                       ball_energy, default_effective_width,
                       prototype_barrier, prototype_spring_model, trigger_map)
from .explore import (ConfigSpaceTrace, GraspProgram, GraspResult,
                      compare_programs, default_program_set,
                      energy_along_program, near_flat_start, run_program)
