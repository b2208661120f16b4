class ConfigException(ValueError):
    pass


class OutputDirectoryException(IOError):
    pass
