"""Exception types shared across the tab2kg modules."""


class Tab2KGError(Exception):
    """Base class for all tab2kg errors."""


# --- tabular ---------------------------------------------------------------

class RaggedRowError(Tab2KGError):
    def __init__(self, row_index, expected, got):
        super().__init__(
            f"row {row_index} has {got} cells, expected {expected}")
        self.row_index = row_index
        self.expected = expected
        self.got = got


class UnterminatedQuoteError(Tab2KGError):
    pass


class EmptyInputError(Tab2KGError):
    pass


class AllNullError(Tab2KGError):
    pass


# --- rdf -------------------------------------------------------------------

class TurtleSyntaxError(Tab2KGError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownPrefixError(Tab2KGError):
    pass


class NoTypedEntitiesError(Tab2KGError):
    pass


class UnknownRelationError(Tab2KGError):
    pass


# --- profiler --------------------------------------------------------------

class UnparseableValueError(Tab2KGError):
    pass


# --- catalog ---------------------------------------------------------------

class MissingFeatureError(Tab2KGError):
    pass


class RankOutOfRangeError(Tab2KGError):
    pass


# --- matcher ---------------------------------------------------------------

class NonFiniteInputError(Tab2KGError):
    pass


class DimensionMismatchError(Tab2KGError):
    pass


class DegenerateDatasetError(Tab2KGError):
    pass


class VersionMismatchError(Tab2KGError):
    pass


class CorruptModelError(Tab2KGError):
    pass


# --- graphgen --------------------------------------------------------------

class UnmappableColumnError(Tab2KGError):
    def __init__(self, column_id):
        super().__init__(f"no data type relation left for column {column_id!r}")
        self.column_id = column_id


class DisconnectedOntologyError(Tab2KGError):
    pass


class CyclicStructureUnsupportedError(Tab2KGError):
    pass


# --- rml -------------------------------------------------------------------

class UnknownColumnReferenceError(Tab2KGError):
    pass


class TemplateOnNullValueError(Tab2KGError):
    pass


# --- datagen ---------------------------------------------------------------

class TooSmallError(Tab2KGError):
    pass


class NoInstantiableTemplateError(Tab2KGError):
    pass
