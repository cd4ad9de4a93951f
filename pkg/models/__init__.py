# Models package initialization
# Parameter, state and configuration dataclasses shared by the simulators
