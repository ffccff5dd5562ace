# app/main.py
import sys
import logging

from app.config import get_config


def run_server() -> None:
    """Start the tool server on stdio"""
    from app.mcp.server import mcp_server, tool_registry
    import app.mcp.tools  # noqa: F401  (pkgutil discovery runs @register_tool)

    config = get_config()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, config.log_level.upper()))
    logging.info("MCP starting (stdio)")
    logging.info("Tools: %s", ", ".join(tool_registry.keys()) or "(none)")
    mcp_server.run(transport="stdio")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--mcp-stdio" in argv:
        run_server()
        return 0
    from app.cli import main as cli_main
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
