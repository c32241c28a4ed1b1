#pragma once

#include <stdexcept>
#include <string>

namespace ltree {

// Every failure raised by the library derives from Error and carries a
// stable kind string (used by the CLI and by tests).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define LTREE_ERROR(Name)                                              \
  struct Name : Error {                                                \
    explicit Name(const std::string& what) : Error(#Name, what) {}     \
  }

LTREE_ERROR(InvalidExponent);
LTREE_ERROR(NonConvergence);
LTREE_ERROR(SubcriticalInput);
LTREE_ERROR(StepUnderflow);
LTREE_ERROR(HorizonOverflow);
LTREE_ERROR(MinNotSettled);
LTREE_ERROR(InfiniteInterior);
LTREE_ERROR(OutOfDomain);
LTREE_ERROR(MalformedPath);
LTREE_ERROR(InvalidSite);
LTREE_ERROR(NotTruncated);
LTREE_ERROR(NodeBudgetExceeded);
LTREE_ERROR(EpsilonBelowResolution);
LTREE_ERROR(NonGrey);
LTREE_ERROR(NotFiniteVariation);
LTREE_ERROR(GridExceedsTruncation);
LTREE_ERROR(BudgetExceeded);
LTREE_ERROR(DegenerateBinning);
LTREE_ERROR(UnknownExperiment);
LTREE_ERROR(ConfigError);

#undef LTREE_ERROR

}  // namespace ltree
