import importlib
import logging
import pkgutil

logger = logging.getLogger(__name__)

# Import every module in this package so its @register_tool functions are
# added to the server.
for _, name, _ in pkgutil.iter_modules(__path__):
    importlib.import_module(f".{name}", __package__)
    logger.debug(f"Loaded tools from: {name}.py")
