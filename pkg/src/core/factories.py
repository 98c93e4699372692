"""
Factories Module
Registries that map configuration keys to concrete classes.
"""
from typing import Dict, Type


class WaveformFactory:
    """
    Factory for field waveforms (constant, linear, harmonic, ...).
    """

    # ENCAPSULATION: Private registry of waveform kinds
    __waveform_registry: Dict[str, Type] = {}

    @staticmethod
    def register_waveform(kind: str, waveform_class: Type):
        """
        Register a waveform class.

        Args:
            kind: Kind identifier used in configs (e.g. 'linear')
            waveform_class: IWaveform subclass
        """
        WaveformFactory.__waveform_registry[kind] = waveform_class

    @staticmethod
    def create_waveform(kind: str, **params):
        """
        Create a waveform instance.

        Args:
            kind: Registered waveform kind
            **params: Constructor arguments of the waveform

        Returns:
            IWaveform instance

        Raises:
            ValueError: If the kind is not registered
        """
        waveform_class = WaveformFactory.__waveform_registry.get(kind)

        if waveform_class is None:
            available = ', '.join(WaveformFactory.__waveform_registry.keys())
            raise ValueError(
                f"Unknown waveform type: '{kind}'. "
                f"Available types: {available}"
            )

        return waveform_class(**params)

    @staticmethod
    def get_registered_waveforms() -> list:
        """Get list of registered waveform kinds"""
        return list(WaveformFactory.__waveform_registry.keys())

    @staticmethod
    def is_registered(kind: str) -> bool:
        return kind in WaveformFactory.__waveform_registry

    def __str__(self) -> str:
        types = ', '.join(WaveformFactory.__waveform_registry.keys())
        return f"WaveformFactory(types=[{types}])"


class WriterFactory:
    """
    Factory for output writers.
    """

    # ENCAPSULATION: Private registry
    __writer_registry: Dict[str, Type] = {}

    @staticmethod
    def register_writer(writer_type: str, writer_class: Type):
        """
        Register a writer class.

        Args:
            writer_type: Type identifier (e.g., 'csv', 'json')
            writer_class: Writer class to register
        """
        WriterFactory.__writer_registry[writer_type] = writer_class

    @staticmethod
    def create_writer(
        writer_type: str,
        output_path: str,
        **kwargs
    ):
        """
        Create writer instance.

        Args:
            writer_type: Type of writer to create
            output_path: Output file path
            **kwargs: Additional arguments

        Returns:
            Writer instance

        Raises:
            ValueError: If writer type not registered
        """
        writer_class = WriterFactory.__writer_registry.get(writer_type)

        if writer_class is None:
            available = ', '.join(WriterFactory.__writer_registry.keys())
            raise ValueError(
                f"Unknown writer type: '{writer_type}'. "
                f"Available types: {available}"
            )

        return writer_class(output_path, **kwargs)

    @staticmethod
    def get_registered_writers() -> list:
        """Get list of registered writer types"""
        return list(WriterFactory.__writer_registry.keys())

    @staticmethod
    def is_registered(writer_type: str) -> bool:
        """Check if writer type is registered"""
        return writer_type in WriterFactory.__writer_registry

    def __str__(self) -> str:
        """String representation"""
        types = ', '.join(WriterFactory.__writer_registry.keys())
        return f"WriterFactory(types=[{types}])"


class ValidatorFactory:
    """
    Factory for validation strategies run over produced data.
    """

    # ENCAPSULATION: Private registry
    __validator_registry: Dict[str, Type] = {}

    @staticmethod
    def register_validator(
        validator_type: str,
        validator_class: Type
    ):
        """
        Register a validator class.

        Args:
            validator_type: Type identifier
            validator_class: Validator class to register
        """
        ValidatorFactory.__validator_registry[validator_type] = (
            validator_class
        )

    @staticmethod
    def create_validator(validator_type: str, **kwargs):
        """
        Create validator instance.

        Args:
            validator_type: Type of validator to create
            **kwargs: Additional arguments

        Returns:
            Validator instance

        Raises:
            ValueError: If validator type not registered
        """
        validator_class = ValidatorFactory.__validator_registry.get(
            validator_type
        )

        if validator_class is None:
            available = ', '.join(
                ValidatorFactory.__validator_registry.keys()
            )
            raise ValueError(
                f"Unknown validator type: '{validator_type}'. "
                f"Available types: {available}"
            )

        return validator_class(**kwargs)

    @staticmethod
    def get_registered_validators() -> list:
        """Get list of registered validator types"""
        return list(ValidatorFactory.__validator_registry.keys())

    @staticmethod
    def is_registered(validator_type: str) -> bool:
        """Check if validator type is registered"""
        return validator_type in ValidatorFactory.__validator_registry

    def __str__(self) -> str:
        """String representation"""
        types = ', '.join(
            ValidatorFactory.__validator_registry.keys()
        )
        return f"ValidatorFactory(types=[{types}])"


class ScenarioFactory:
    """
    Factory for canned experiments, keyed by their CLI name.
    """

    # ENCAPSULATION: Private registry
    __scenario_registry: Dict[str, Type] = {}

    @staticmethod
    def register_scenario(name: str, scenario_class: Type):
        ScenarioFactory.__scenario_registry[name] = scenario_class

    @staticmethod
    def create_scenario(name: str, config, **kwargs):
        """
        Create a scenario bound to a run configuration.

        Args:
            name: Registered scenario name (e.g. 'linear-ramp')
            config: Validated RunConfig
            **kwargs: Additional arguments (e.g. worker count)

        Returns:
            IScenario instance

        Raises:
            ValueError: If the scenario is not registered
        """
        scenario_class = ScenarioFactory.__scenario_registry.get(name)

        if scenario_class is None:
            available = ', '.join(ScenarioFactory.__scenario_registry.keys())
            raise ValueError(
                f"Unknown scenario type: '{name}'. "
                f"Available types: {available}"
            )

        return scenario_class(config, **kwargs)

    @staticmethod
    def get_registered_scenarios() -> list:
        return list(ScenarioFactory.__scenario_registry.keys())

    @staticmethod
    def get_scenario_class(name: str) -> Type:
        scenario_class = ScenarioFactory.__scenario_registry.get(name)
        if scenario_class is None:
            available = ', '.join(ScenarioFactory.__scenario_registry.keys())
            raise ValueError(
                f"Unknown scenario type: '{name}'. "
                f"Available types: {available}"
            )
        return scenario_class

    @staticmethod
    def is_registered(name: str) -> bool:
        return name in ScenarioFactory.__scenario_registry

    def __str__(self) -> str:
        types = ', '.join(ScenarioFactory.__scenario_registry.keys())
        return f"ScenarioFactory(types=[{types}])"


# Module exports
__all__ = [
    'WaveformFactory',
    'WriterFactory',
    'ValidatorFactory',
    'ScenarioFactory'
]
