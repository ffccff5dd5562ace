"""MCP server definition and tool registration"""
import inspect
import logging

import pydantic
from mcp.server.fastmcp import FastMCP

from app.config import get_config

logger = logging.getLogger(__name__)


def parse_docstring(func):
    """Split a Google-style docstring into a summary line and per-argument text"""
    docstring = inspect.getdoc(func)
    if not docstring:
        return "No description available.", {}

    lines = docstring.strip().split('\n')
    description = lines[0].strip()
    arg_descriptions = {}
    in_args = False

    for line in lines[1:]:
        line = line.strip()
        if line.lower() in ('args:', 'parameters:'):
            in_args = True
            continue
        if line.lower() in ('returns:', 'raises:', 'example:', 'examples:'):
            in_args = False
            continue
        if in_args and ':' in line:
            arg_name, arg_desc = line.split(':', 1)
            arg_descriptions[arg_name.strip()] = arg_desc.strip()

    return description, arg_descriptions


def create_model_from_func(func, arg_descriptions):
    """Pydantic input schema built from the tool's signature"""
    fields = {}
    for param in inspect.signature(func).parameters.values():
        field_info = {"description": arg_descriptions.get(param.name, "")}
        if param.default is not inspect.Parameter.empty:
            field_info["default"] = param.default
        fields[param.name] = (param.annotation, pydantic.Field(**field_info))

    return pydantic.create_model(f"{func.__name__}Schema", **fields)


mcp_server = FastMCP(name=get_config().mcp_server_name)

tool_registry = {}


def add_tool_to_registry(func):
    """Parse a tool function, record its schema and register it with the server"""
    tool_name = func.__name__
    try:
        description, arg_descriptions = parse_docstring(func)
        tool_registry[tool_name] = {
            "name": tool_name,
            "description": description,
            "schema": create_model_from_func(func, arg_descriptions),
            "function": func,
        }
        mcp_server.tool()(func)
        logger.info(f"Registered tool: '{tool_name}'")
    except Exception as e:
        logger.error(f"Failed to register tool '{tool_name}': {e}")


def register_tool(func):
    """Decorator that registers a function as a tool"""
    add_tool_to_registry(func)
    return func


__all__ = ['mcp_server', 'register_tool', 'tool_registry']
