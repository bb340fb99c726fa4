"""Immutable slotted base for value types."""

import numpy as np
from basicco import SlottedBase, SlottedBaseMeta
from basicco.custom_repr import mapping_repr
from tippo import Any, Dict, Tuple, Type, TypeVar

__all__ = ["ValueMeta", "Value", "frozen_array"]


def frozen_array(value, dtype=None):
    # type: (Any, Any) -> np.ndarray
    """
    Copy a value into a read-only numpy array.

    :param value: Array-like value.
    :param dtype: Optional dtype.
    :return: Read-only array.
    """
    array = np.array(value, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


def _state_key(value):
    # type: (Any) -> Any
    if isinstance(value, np.ndarray):
        return value.dtype.str, value.shape, value.tobytes()
    if isinstance(value, (list, tuple)):
        return tuple(_state_key(v) for v in value)
    if isinstance(value, dict):
        return tuple(sorted((k, _state_key(v)) for k, v in value.items()))
    return value


def _value_repr(value):
    # type: (Any) -> str
    if isinstance(value, np.ndarray):
        return "array(shape={!r})".format(value.shape)
    return repr(value)


class ValueMeta(SlottedBaseMeta):
    """Locks instances once their `__init__` has run."""

    def __call__(cls, *args, **kwargs):
        # type: (*Any, **Any) -> Any
        self = super(ValueMeta, cls).__call__(*args, **kwargs)
        object.__setattr__(self, "_Value__locked", True)
        return self


_V = TypeVar("_V", bound="Value")


class Value(SlottedBase, metaclass=ValueMeta):
    """
    Immutable value with structural equality.

    Subclasses declare `__slots__`, assign them in `__init__` and list the
    attributes that define the value in `__fields__`.
    Public class attributes are locked after class creation, and declaring
    `__eq__` without `__hash__` in a subclass raises a :class:`TypeError`.
    """

    __slots__ = ("__locked",)
    __fields__ = ()  # type: Tuple[str, ...]

    def __setattr__(self, name, value):
        # type: (str, Any) -> None
        """Prevent setting attributes after construction."""
        if getattr(self, "_Value__locked", False):
            error = "can't set read-only attribute {!r} of {!r}".format(
                name, type(self).__name__
            )
            raise AttributeError(error)
        super(Value, self).__setattr__(name, value)

    def __delattr__(self, name):
        # type: (str) -> None
        """Prevent deleting attributes."""
        error = "can't delete read-only attribute {!r} of {!r}".format(
            name, type(self).__name__
        )
        raise AttributeError(error)

    def __hash__(self):
        # type: () -> int
        """
        Get hash.

        :return: Hash.
        """
        return hash((type(self).__name__, _state_key(self._field_values())))

    def __eq__(self, other):
        # type: (object) -> bool
        """
        Compare for exact structural equality.

        :param other: Other.
        :return: True if equal.
        """
        if type(other) is not type(self):
            return NotImplemented
        assert isinstance(other, Value)
        return _state_key(self._field_values()) == _state_key(other._field_values())

    def __repr__(self):
        # type: () -> str
        """
        Get representation.

        :return: Representation.
        """
        return mapping_repr(
            zip(self.__fields__, self._field_values()),
            prefix="{}(".format(type(self).__name__),
            template="{key}={value}",
            suffix=")",
            key_repr=str,
            value_repr=_value_repr,
        )

    def __copy__(self):
        # type: (_V) -> _V
        return self

    def __deepcopy__(self, memo):
        # type: (_V, Dict[int, Any]) -> _V
        return self

    def __reduce__(self):
        # type: () -> Tuple[Any, ...]
        state = dict(zip(self.__fields__, self._field_values()))
        return _rebuild, (type(self), state)

    def _field_values(self):
        # type: () -> Tuple[Any, ...]
        return tuple(getattr(self, name) for name in self.__fields__)

    def evolve(self, **changes):
        # type: (_V, **Any) -> _V
        """
        Make a copy with some fields replaced.

        :param changes: Field values to replace.
        :return: New value.
        :raise TypeError: Unknown field.
        """
        unknown = set(changes).difference(self.__fields__)
        if unknown:
            error = "{!r} has no fields {}".format(
                type(self).__name__, ", ".join(sorted(repr(n) for n in unknown))
            )
            raise TypeError(error)
        kwargs = dict(zip(self.__fields__, self._field_values()))
        kwargs.update(changes)
        return type(self)(**kwargs)


def _rebuild(cls, kwargs):
    # type: (Type[_V], Dict[str, Any]) -> _V
    return cls(**kwargs)
