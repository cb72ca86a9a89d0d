from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field


class RunConfig(BaseModel):
    """
    Effective parameters of one command-line run, as recorded in its manifest.

    `argv` is the fully explicit argument vector: replaying it reproduces the run
    without consulting the environment or a config file.
    """

    command: str
    argv: tuple[str, ...]
    seed: int = Field(ge=0, lt=2**64)
    output_dir: Path
    output_format: Literal["csv"] = "csv"
    parameters: dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)

    def manifest_entries(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "output_format": self.output_format,
            **self.parameters,
        }
