"""QA 게이트 알림 모듈"""
from .qa_gate import QaGate, QaAlert

__all__ = ["QaGate", "QaAlert"]
