"""Exception types shared across the package."""


class VidtutorError(Exception):
    """Base class for all errors raised by this package."""


class MalformedTimestamp(VidtutorError):
    """Timestamp string does not match ``HH:MM:SS,mmm`` or has out-of-range fields."""


class MalformedBlock(VidtutorError):
    """An SRT block violates the format (bad index line or timestamp line)."""

    def __init__(self, message: str, block_ordinal: int):
        super().__init__(f"block {block_ordinal}: {message}")
        self.block_ordinal = block_ordinal


class TranscriptDecodeError(VidtutorError):
    """Transcript bytes are not valid UTF-8; carries the failing byte offset."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class EmptyTranscript(VidtutorError):
    """No usable blocks were found in the transcript."""


class InvalidChunkParams(VidtutorError):
    """Chunk size must be strictly greater than the overlap."""


class DimensionMismatch(VidtutorError):
    """Vector dimensions disagree (embedder vs store, or vector pair)."""


class ProviderUnavailable(VidtutorError):
    """A remote provider could not be reached or rejected the request."""


class DuplicateChunkId(VidtutorError):
    """A chunk id collides with a record already in the store."""


class CorruptStore(VidtutorError):
    """Persisted store files are inconsistent or unparseable."""


class EmbedderMismatch(VidtutorError):
    """Store was built with a different embedder than the one configured."""


class MalformedToolCall(VidtutorError):
    """Tool-call arguments are not valid JSON or violate the declared schema."""


class StreamInterrupted(VidtutorError):
    """A completion stream ended before its end event."""


class ScriptExhausted(VidtutorError):
    """The scripted provider received more calls than it has canned responses."""


class RunnerUnavailable(VidtutorError):
    """No runner is configured for the requested programming language."""


class InvalidTaskDefinition(VidtutorError):
    """A task directory is missing required files or redefines a task id."""


class PromptTemplateError(VidtutorError):
    """Prompt template is missing a section or references an unknown placeholder."""
