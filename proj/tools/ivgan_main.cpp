#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ivgan/cli.hpp"
#include "ivgan/errors.hpp"

namespace {

const char* kCommands[] = {"train", "eval", "square-fit", "gradcheck", "invariance"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intervention GAN experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<CLI::App*> subs;
  for (const char* name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value file");
    sub->allow_extras();
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ivgan::kExitConfig;
  }

  CLI::App* chosen = nullptr;
  for (CLI::App* s : subs)
    if (s->parsed()) chosen = s;

  ivgan::RunConfig config;
  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ivgan::ConfigError("config", 0, "cannot read config file " + config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      text = buf.str();
    }
    // Remaining arguments are --key value (or --key=value) overrides.
    std::vector<std::pair<std::string, std::string>> overrides;
    const std::vector<std::string> extras = chosen->remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      std::string arg = extras[i];
      if (arg.rfind("--", 0) != 0) throw ivgan::ConfigError(arg, 0, "unexpected argument '" + arg + "'");
      arg = arg.substr(2);
      const auto eq = arg.find('=');
      if (eq != std::string::npos) {
        overrides.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
      } else if (i + 1 < extras.size()) {
        overrides.emplace_back(arg, extras[++i]);
      } else {
        throw ivgan::ConfigError(arg, 0, "missing value for --" + arg);
      }
    }
    if (const char* env = std::getenv("IVGAN_OUT_DIR"); env && *env) {
      overrides.emplace_back("out_dir", env);
    }
    config = ivgan::parse_config(text, overrides);
  } catch (const ivgan::ConfigError& e) {
    std::cerr << "configuration error (key '" << e.key() << "'"
              << (e.line() > 0 ? ", line " + std::to_string(e.line()) : std::string()) << "): " << e.what()
              << '\n';
    return ivgan::kExitConfig;
  }

  try {
    const std::string name = chosen->get_name();
    if (name == "train") return ivgan::cmd_train(config, std::cout);
    if (name == "eval") return ivgan::cmd_eval(config, std::cout);
    if (name == "square-fit") return ivgan::cmd_square_fit(config, std::cout);
    if (name == "gradcheck") return ivgan::cmd_gradcheck(config, std::cout);
    return ivgan::cmd_invariance(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ivgan::kExitAbort;
  }
}
