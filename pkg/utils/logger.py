import json
import os
from datetime import datetime
from pathlib import Path

RUN_LOG_FILE = 'run_log.json'


def save_report(report, path):
    """
    Write a JSON report.

    Reports carry no timestamps, so equal inputs give byte-identical files.
    """
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding="utf-8") as f:
        json.dump(report, f, indent=2, default=str)
    return path


def save_run_to_log(run_info, output_dir, log_file=RUN_LOG_FILE):
    """
    Append one command run to the run log in output_dir

    Expected run_info fields:
    - command
    - exit_code
    - outputs (list of written files)
    - argv
    """
    log_path = Path(output_dir) / log_file
    log_path.parent.mkdir(parents=True, exist_ok=True)
    log_data = []
    if os.path.exists(log_path):
        with open(log_path, 'r', encoding="utf-8") as f:
            log_data = json.load(f)

    entry = dict(run_info)
    entry.setdefault('generated_at', datetime.now().strftime("%Y-%m-%d %H:%M:%S"))
    entry['status'] = 'ok' if entry.get('exit_code', 0) == 0 else 'failed'
    log_data.append(entry)

    with open(log_path, 'w', encoding="utf-8") as f:
        json.dump(log_data, f, indent=2, default=str)
    return log_path


def get_run_summary(output_dir, log_file=RUN_LOG_FILE):
    """Counts of logged runs per command and per exit code"""
    empty = {'total_runs': 0, 'by_command': {}, 'by_exit_code': {}, 'failed_runs': 0}
    log_path = Path(output_dir) / log_file
    if not os.path.exists(log_path):
        return empty

    try:
        with open(log_path, 'r', encoding='utf-8') as f:
            runs = json.load(f)
    except Exception as e:
        print(f"❌ Error reading run log: {e}")
        return empty

    by_command = {}
    by_exit_code = {}
    for run in runs:
        command = run.get('command', 'unknown')
        code = str(run.get('exit_code', 0))
        by_command[command] = by_command.get(command, 0) + 1
        by_exit_code[code] = by_exit_code.get(code, 0) + 1

    return {
        'total_runs': len(runs),
        'by_command': by_command,
        'by_exit_code': by_exit_code,
        'failed_runs': sum(n for code, n in by_exit_code.items() if code != '0'),
    }
