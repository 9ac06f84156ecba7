"""declink: capture creative workflows as linked cognitive decision steps,
detect weak rationales, ask anchored clarification questions, infer missing
rationales from prior steps, and export structured decision documentation.
Includes a benchmark harness for segmentation and rationale-evaluation
metrics."""

__version__ = "0.1.0"
