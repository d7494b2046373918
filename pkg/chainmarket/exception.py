class CMException(Exception):
    pass


class InvalidOperationError(CMException):
    pass


class InvalidParamError(CMException):
    pass


class NotFoundError(CMException):
    pass


class NotSupportedError(CMException):
    pass


class OptionError(CMException):
    pass


class TypeError(CMException):
    pass


class MergeError(CMException):
    pass


class ConfigFileError(CMException):
    pass


class ConfigError(CMException):
    pass


class InstanceFileError(CMException):
    pass


class InstanceTooLargeError(CMException):
    pass


class PricingError(CMException):
    pass


class PaymentError(CMException):
    pass


class SweepError(CMException):
    pass
