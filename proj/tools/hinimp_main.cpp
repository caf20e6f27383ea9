#include <CLI11.hpp>
#include <iostream>

#include "hinimp/commands.hpp"
#include "hinimp/errors.hpp"

using namespace hinimp;

int main(int argc, char** argv) {
  CLI::App app{"hinimp - node importance estimation on heterogeneous information networks"};
  app.footer(RunConfig::describe_keys());

  std::string config_path, out_override;
  int64_t seed_override = -1;
  const std::vector<std::string> commands = {"generate", "preprocess", "train", "evaluate", "predict", "ablate"};
  std::string command;
  app.add_option("command", command, "one of: generate|preprocess|train|evaluate|predict|ablate")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("--config", config_path, "flat key=value config file")->required();
  app.add_option("--seed", seed_override, "override the config seed");
  app.add_option("--out", out_override, "override the config output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  try {
    KeyValueConfig kv = KeyValueConfig::parse_file(config_path);
    if (seed_override >= 0) kv.set("seed", std::to_string(seed_override));
    if (!out_override.empty()) kv.set("out", out_override);
    const RunConfig rc = RunConfig::from_config(kv);

    if (command == "generate") {
      cmd_generate(rc);
      std::cout << "wrote dataset under " << rc.out_dir << "\n";
    } else if (command == "preprocess") {
      const auto outcome = cmd_preprocess(rc);
      std::cout << (outcome.cache_hit ? "cache hit" : "built knowledge bank") << " (key " << outcome.cache_key
                << ", " << outcome.bank.subnets.size() << " sub-networks)\n";
    } else if (command == "train") {
      const auto res = cmd_train(rc);
      std::cout << "trained " << res.folds.size() << " fold(s); aggregate test mae=" << format_double(res.aggregate.mae)
                << " rmse=" << format_double(res.aggregate.rmse)
                << " spearman=" << format_double(res.aggregate.spearman) << "\n";
    } else if (command == "evaluate") {
      const auto rep = cmd_evaluate(rc);
      std::cout << "fold " << rc.eval_fold << " " << rc.eval_split << ": mae=" << format_double(rep.micro.mae)
                << " rmse=" << format_double(rep.micro.rmse) << " nrmse=" << format_double(rep.micro.nrmse)
                << " ndcg=" << format_double(rep.micro.ndcg) << " spearman=" << format_double(rep.micro.spearman)
                << "\n";
    } else if (command == "predict") {
      for (const auto& [id, score] : cmd_predict(rc)) std::cout << id << "\t" << format_double(score) << "\n";
    } else if (command == "ablate") {
      cmd_ablate(rc);
      std::cout << "wrote " << rc.out_dir << "/ablate.csv and ablate.svg\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
