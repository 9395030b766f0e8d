"""Configuration and report output."""
from ui.report import ReportTheme, print_report, write_csv, write_json
from ui.settings import RunConfig, config_from_dict, load_config

__all__ = [
    'ReportTheme', 'print_report', 'write_csv', 'write_json',
    'RunConfig', 'config_from_dict', 'load_config',
]
