"""Few-photon scattering off a Kerr resonator chirally coupled to a 1D waveguide.

Closed-form one- and two-photon scattering amplitudes, a discretized-continuum
time-domain solver used to check them, and a CLI that writes figure datasets.
All rates and frequencies are in units of the total decay rate unless stated.
"""

from chiral_kerr.model import (
    CouplingConfig,
    ModeMixing,
    coupling_asymmetry,
    is_symmetric,
    mode_mixing,
    total_decay,
)
from chiral_kerr.single import (
    SinglePhotonSpectrum,
    WavepacketSpec,
    bare_phase_shift,
    initial_amplitude,
    reflection,
    spectrum,
    transmission_left_incident,
    transmission_right_incident,
)
from chiral_kerr.twophoton import (
    ChannelAmplitudes,
    Direction,
    FrequencyPairGrid,
    TwoPhotonSpec,
    bound_state_amplitude,
    channel_amplitudes,
    channel_probability,
    initial_joint_amplitude,
    nonreciprocity_metrics,
    norm_const,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelAmplitudes",
    "CouplingConfig",
    "Direction",
    "FrequencyPairGrid",
    "ModeMixing",
    "SinglePhotonSpectrum",
    "TwoPhotonSpec",
    "WavepacketSpec",
    "bare_phase_shift",
    "bound_state_amplitude",
    "channel_amplitudes",
    "channel_probability",
    "coupling_asymmetry",
    "initial_amplitude",
    "initial_joint_amplitude",
    "is_symmetric",
    "mode_mixing",
    "nonreciprocity_metrics",
    "norm_const",
    "reflection",
    "spectrum",
    "total_decay",
    "transmission_left_incident",
    "transmission_right_incident",
]
