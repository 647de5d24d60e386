from coderet.dynamic_config import load_pipeline_config
from coderet.pipeline import run_pipeline
from coderet import config as app_config

if __name__ == "__main__":
    print("\n🚀 Starting the CodeRet pipeline on the bundled toy corpus...\n")
    context = run_pipeline(load_pipeline_config("config.yaml"), app_config.RESULTS_FOLDER)
    print(f"\n✅ Done. MRR {context.get_result('report').mrr:.4f}. Results saved in '{app_config.RESULTS_FOLDER}/' folder.\n")
