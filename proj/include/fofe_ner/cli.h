#ifndef FOFE_NER_CLI_H_
#define FOFE_NER_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace fofe_ner {

// Entry point of the fofe-ner tool. `args` excludes the program name.
// Returns the process exit status; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace fofe_ner

#endif  // FOFE_NER_CLI_H_
