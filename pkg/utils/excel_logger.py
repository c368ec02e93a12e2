# utils/excel_logger.py
import pandas as pd
from pathlib import Path

SWEEP_COLUMNS = ['t', 'C_A_equal', 'C_A_opt', 'C_0', 'M', 'K', 'c_l1', 'beta_opt']
TRIAL_COLUMNS = [
    'seed', 't', 'dimension', 'shift', 'k_cut', 'm_total', 'c_l1', 'coefficient_sum_error',
    'measured_error', 'bound', 'ratio', 'unshifted_error', 'unshifted_bound',
    'unitarity_deviation', 'norm_decay_ratio', 'cmax_holds', 'passed'
]


class ExcelReportLogger:
    def __init__(self, file_path="results/lchs_report.xlsx"):
        self.file_path = file_path
        self.ensure_directory_exists()

    def ensure_directory_exists(self):
        """Create output directory if it doesn't exist"""
        Path(self.file_path).parent.mkdir(parents=True, exist_ok=True)

    def write_sheets(self, sheets):
        """Write {sheet name: DataFrame or list of dicts} into one workbook"""
        try:
            with pd.ExcelWriter(self.file_path, engine='openpyxl') as writer:
                for name, data in sheets.items():
                    df = data if isinstance(data, pd.DataFrame) else pd.DataFrame(data)
                    df.to_excel(writer, sheet_name=name[:31], index=False)
            return self.file_path
        except Exception as e:
            print(f"❌ Error writing Excel report: {e}")
            raise

    def write_sweep(self, rows):
        """Sweep rows plus a per-column summary"""
        df = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
        numeric = df.apply(pd.to_numeric, errors='coerce')
        summary = pd.DataFrame({
            'Metric': ['points', 'feasible_equal', 'feasible_opt', 'max_C_A_equal', 'max_M'],
            'Value': [
                len(df),
                int(numeric['C_A_equal'].notna().sum()),
                int(numeric['C_A_opt'].notna().sum()),
                numeric['C_A_equal'].max(),
                numeric['M'].max(),
            ],
        })
        path = self.write_sheets({'Sweep': df, 'Summary': summary})
        print(f"💾 Sweep workbook: {path}")
        return path

    def write_validation(self, trials, summary):
        """Per-trial rows and the summary metrics of a validation run"""
        df = pd.DataFrame(trials, columns=TRIAL_COLUMNS)
        summary_df = pd.DataFrame([{'Metric': k, 'Value': v} for k, v in summary.items()])
        return self.write_sheets({'Trials': df, 'Summary': summary_df})


def get_excel_logger(file_path):
    return ExcelReportLogger(file_path)


def save_sweep_to_excel(rows, file_path):
    """Write sweep rows to an Excel workbook"""
    return get_excel_logger(file_path).write_sweep(rows)


def save_validation_to_excel(trials, summary, file_path):
    """Write validation trials to an Excel workbook"""
    return get_excel_logger(file_path).write_validation(trials, summary)
