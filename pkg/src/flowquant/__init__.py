"""Flow-based quantization of observables linear in momentum, and the
oriented arrival-time distribution of a free quantum particle.

The package is organized around four layers:

* :mod:`flowquant.grids` — uniform 1-D grids, wave functions, packets,
  norms and the probability current;
* :mod:`flowquant.transforms` — unitary changes of representation
  (position/momentum Fourier pair, free evolution, the oriented-energy map
  and the arrival-time spectral transform);
* :mod:`flowquant.flows` — transport flows of vector fields, completeness
  classification (the self-adjointness criterion), half-density transport,
  the Lie-derivative generator and the phase-ambiguous plugged transport;
* :mod:`flowquant.arrival` / :mod:`flowquant.classical` — the arrival-time
  distribution with its mover decomposition, and the classical phase-space
  ensembles used to cross-check it.

Everything is 1-D and deterministic; stochastic helpers take explicit seeds.
"""

from .arrival import (ArrivalDistribution, ArrivalMoments, BackflowSpec,
                      Component, arrival_amplitude_fast,
                      arrival_amplitude_quadrature, arrival_distribution,
                      arrival_moments, classical_arrival_time,
                      default_time_grid, make_backflow_packet,
                      oriented_arrival_time, probability_in_interval,
                      split_movers)
from .classical import (ArrivalStats, Histogram, Marginals,
                        PhaseSpaceEnsemble, classical_arrival_oracle,
                        ensemble_from_packet, evolve_ensemble,
                        exact_momentum_histogram, gaussian_ensemble,
                        l1_distance, marginals, momentum_from_position_limit,
                        quantum_momentum_limit)
from .errors import (BinRangeTooSmall, BoxOverflow, FlowQuantError,
                     GridMismatch, GridTooSmall, InconclusiveClassification,
                     IntervalOutOfRange, LowMomentumMass,
                     MomentumFloorViolated, NegativeMomentumLeak,
                     NonPositiveWidth, NotComplete, NotPluggable, OutOfDomain,
                     QuadratureNonConvergence, RepMismatch, RoughInput,
                     ScenarioError, ZeroFieldValue, ZeroWeightComponent)
from .flows import (EscapeSample, FlowClass, FlowResult, FlowVerdict,
                    ProbeSpec, VectorField1D, apply_generator, arrival_field,
                    classify_flow, constant_field, cubic_field,
                    expression_field, integrate_flow, lie_derivative,
                    linear_field, oriented_arrival_field,
                    pluggable_transport, quadratic_field, straighten,
                    straightened_oriented_field, transport)
from .grids import (CurrentField, Grid1D, PhysicalParams, Representation,
                    WaveFunction, gaussian_packet, inner_product, moments,
                    norm_squared, packet_fits_box, probability_current,
                    spectral_derivative)
from .transforms import (TransformReport, default_momentum_floor,
                         default_oriented_grid, evolve_free, fourier_eval,
                         from_oriented_energy, low_momentum_mass,
                         to_arrival_time, to_momentum, to_oriented_energy,
                         to_position)

__version__ = "0.1.0"
