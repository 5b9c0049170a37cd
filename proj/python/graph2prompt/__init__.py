"""graph2prompt: compile attributed graphs into multi-choice prompts."""

try:
    from graph2prompt._graph2prompt import *  # noqa: F401,F403
except ImportError:  # in-tree builds put the extension on PYTHONPATH directly
    from _graph2prompt import *  # noqa: F401,F403
