"""
설정 파일 로더 모듈
YAML 설정 파일(및 JSON 실험 문서)을 로드하고 관리합니다.
"""
import yaml
from pathlib import Path
from typing import Dict, Any, Optional, Union

from .errors import ConfigError


class ConfigLoader:
    """설정 파일을 로드하고 관리하는 클래스"""

    def __init__(self, config_dir: Optional[Union[str, Path]] = None):
        """
        ConfigLoader 초기화

        Args:
            config_dir: 설정 파일 디렉토리 경로 (기본값: 프로젝트 루트의 configs/)
        """
        if config_dir is None:
            # 프로젝트 루트 기준으로 configs 디렉토리 찾기
            project_root = Path(__file__).parent.parent.parent
            config_dir = project_root / "configs"

        self.config_dir = Path(config_dir)
        self._configs: Dict[str, Dict[str, Any]] = {}

    def load_config(self, config_name: str) -> Dict[str, Any]:
        """
        특정 설정 파일을 로드합니다.

        Args:
            config_name: 설정 파일 이름 (확장자 제외, 예: "config_experiment")

        Returns:
            설정 딕셔너리
        """
        if config_name in self._configs:
            return self._configs[config_name]

        config_path = self.config_dir / f"{config_name}.yaml"
        if not config_path.exists():
            raise FileNotFoundError(f"설정 파일을 찾을 수 없습니다: {config_path}")

        config = self.load_document(config_path)
        self._configs[config_name] = config
        return config

    @staticmethod
    def load_document(path: Union[str, Path]) -> Dict[str, Any]:
        """
        사용자 설정 문서(.yaml / .yml / .json)를 로드합니다.

        JSON은 YAML의 부분집합이므로 같은 로더로 읽습니다.

        Args:
            path: 문서 경로

        Returns:
            설정 딕셔너리 (빈 문서면 빈 딕셔너리)
        """
        path = Path(path)
        with open(path, "r", encoding="utf-8") as f:
            try:
                document = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigError(f"설정 문서를 해석할 수 없습니다: {path} ({e})") from e

        if document is None:
            return {}
        if not isinstance(document, dict):
            raise ConfigError(f"설정 문서의 최상위는 매핑이어야 합니다: {path}")
        return document

    def get_experiment_config(self) -> Dict[str, Any]:
        """실험(시뮬레이션/재구성) 기본 설정을 반환합니다."""
        return self.load_config("config_experiment")

    def get_qa_config(self) -> Dict[str, Any]:
        """QA 게이트 임계값 설정을 반환합니다."""
        return self.load_config("config_qa")

    def get_dashboard_config(self) -> Dict[str, Any]:
        """대시보드 설정을 반환합니다."""
        return self.load_config("config_dashboard")


# 전역 설정 로더 인스턴스
_config_loader = None


def get_config_loader() -> ConfigLoader:
    """전역 설정 로더 인스턴스를 반환합니다."""
    global _config_loader
    if _config_loader is None:
        _config_loader = ConfigLoader()
    return _config_loader
