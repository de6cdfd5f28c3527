"""
예외 계층 모듈
툴킷 전반에서 사용하는 오류 타입을 정의합니다.
"""


class QaToolkitError(Exception):
    """툴킷 오류의 기본 클래스"""


class InvalidInputError(QaToolkitError, ValueError):
    """입력 값이 사전 조건을 만족하지 않음"""


class OutOfRangeError(InvalidInputError):
    """조회 시점/인덱스가 유효 범위를 벗어남 (예: 포즈 스트림 밖의 시각)"""


class ConfigError(InvalidInputError):
    """실험/세그멘테이션 설정 문서가 잘못됨 (CLI 종료 코드 2)"""


class DegenerateError(QaToolkitError, ValueError):
    """수치적으로 퇴화된 입력"""


class DegenerateSignalError(DegenerateError):
    """분산이 0인 신호 (지연 추정 불가)"""


class DegenerateConfigurationError(DegenerateError):
    """점 배치가 퇴화됨 (공선/공면, 점 개수 부족)"""


class DegenerateHistogramError(DegenerateError):
    """단일 값 히스토그램 (Otsu 임계값 정의 불가)"""


class DegenerateComponentError(DegenerateError):
    """형상 기술자를 계산할 수 없는 연결 성분"""
