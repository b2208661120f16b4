import functools
import inspect
import logging
from time import perf_counter

import numpy as np


def _logger_for(method, args) -> logging.Logger:
    """
    Pick the logger of the bound instance (its ``log`` attribute) or fall back to the logger of the defining module.
    """
    if args and isinstance(getattr(args[0], 'log', None), logging.Logger):
        return args[0].log
    return logging.getLogger(method.__module__)


def _summarize(value, limit: int = 120) -> str:
    if isinstance(value, np.ndarray):
        return f"ndarray(shape={value.shape}, dtype={value.dtype})"
    text = repr(value)
    return text if len(text) <= limit else f"{text[:limit]}..."


def log_method_calls(method, name, **callbacks):
    """
    A decorator to log method calls. The decorator logs the method name and its arguments, with numpy arrays reduced
    to their shape and dtype.

    :param method: The method to be decorated.
    :param name: The name the call is logged under.
    :return: The decorated method.
    """

    line = getattr(inspect.unwrap(method), '__code__', None)
    line = line.co_firstlineno if line else '?'

    @functools.wraps(method)
    def wrapper(*args, **kwargs):
        log = _logger_for(method, args)
        if log.isEnabledFor(logging.DEBUG):
            shown = ', '.join([_summarize(a) for a in args] + [f"{k}={_summarize(v)}" for k, v in kwargs.items()])
            log.debug(f"Calling {name}({shown}), line {line}")
        return method(*args, **kwargs)

    return wrapper


def log_time(method, name, **callbacks):
    """
    A decorator to log the execution time of a method. Slow calls are logged at a higher level.

    :param method: The method to be decorated.
    :param name: The name the timing is logged under.
    :return: The decorated method.
    """

    @functools.wraps(method)
    def wrapper(*args, **kwargs):
        start = perf_counter()
        return_value = method(*args, **kwargs)
        elapsed = perf_counter() - start
        level = logging.DEBUG
        limits = [60, 600]
        levels = [logging.INFO, logging.WARNING]
        while limits and elapsed > limits.pop(0):
            level = levels.pop(0)

        _logger_for(method, args).log(level, f"{name} took {elapsed:.5f} seconds to execute.")
        return return_value

    return wrapper


def error_handler(method, name, **callbacks):
    """
    A decorator to handle exceptions in a method. The exception is logged, then handed to the ``on_error`` callback
    when one is given, otherwise re-raised.

    :param method: The method to be decorated.
    :param name: The name of the method.
    :param callbacks: ``on_error(args, method, name, exception)`` is called instead of re-raising.
    :return: The decorated method.
    """

    @functools.wraps(method)
    def wrapper(*args, **kwargs):
        try:
            return method(*args, **kwargs)
        except Exception as e:
            _logger_for(method, args).error(f"An error occurred in {name}: {e.__class__.__name__}: {e}")
            if 'on_error' in callbacks:
                return callbacks['on_error'](args, method, name, e)
            raise

    return wrapper


def class_decorator(*decorators, **callbacks):
    """
    A decorator to decorate all public methods of a class with a list of decorators.

    :param decorators: The decorators to be applied to the methods of the class.
    :param callbacks: Callbacks handed on to every decorator.
    :return: The class decorator.
    """

    def decorate(cls):
        for name, method in list(cls.__dict__.items()):
            if name.startswith('_') or not callable(method) or isinstance(method, (type, staticmethod, classmethod)):
                continue
            for decorator in decorators:
                method = decorator(method, f"{cls.__name__}.{name}", **callbacks)
            setattr(cls, name, method)
        return cls

    return decorate


def function_decorator(*decorators, **callbacks):
    """
    Apply a list of decorators to a single module-level function.

    :param decorators: The decorators to be applied.
    :param callbacks: Callbacks handed on to every decorator.
    :return: The function decorator.
    """

    def decorate(function):
        decorated = function
        for decorator in decorators:
            decorated = decorator(decorated, function.__name__, **callbacks)
        return decorated

    return decorate
