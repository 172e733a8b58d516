"""Nuclear wavepacket dynamics of a diatomic molecule coupled to a lossy
quantized plasmonic mode: FEDVR grids, Lindblad propagation with absorbing
boundaries, polaritonic curves, and parameter-scan drivers."""

__version__ = "0.1.0"
