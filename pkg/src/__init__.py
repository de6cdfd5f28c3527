"""초음파 3D 재구성 QA 툴킷 소스 코드 패키지"""

__version__ = "1.0.0"
