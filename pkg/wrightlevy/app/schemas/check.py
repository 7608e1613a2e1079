from typing import Optional

from pydantic import BaseModel, Field


class CheckResult(BaseModel):
    """Outcome of one acceptance check."""

    name: str = Field(..., description="Check identifier")
    passed: bool
    worst: float = Field(..., description="Largest observed discrepancy")
    tolerance: float = Field(..., description="Allowed discrepancy")
    detail: Optional[str] = Field(default=None, description="Where the worst case occurred")

    def line(self) -> str:
        status = "ok" if self.passed else "FAIL"
        where = f" ({self.detail})" if self.detail else ""
        return f"{status:4s} {self.name}: {self.worst:.3e} <= {self.tolerance:.1e}{where}"
