#pragma once

#include <stdexcept>
#include <string>

namespace discordq {

// Root of every error the library throws. Callers that only care about
// "something in discordq failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DISCORDQ_ERROR(Name)            \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

DISCORDQ_ERROR(ParseError);
DISCORDQ_ERROR(ValidationError);
DISCORDQ_ERROR(InputError);
DISCORDQ_ERROR(ProviderUnavailable);
DISCORDQ_ERROR(AllProvidersDown);
DISCORDQ_ERROR(FetchError);
DISCORDQ_ERROR(StoryUnavailable);
DISCORDQ_ERROR(OneClassOnly);
DISCORDQ_ERROR(MismatchedAnswerSets);
DISCORDQ_ERROR(ZeroVariance);
DISCORDQ_ERROR(NotFound);
DISCORDQ_ERROR(CorruptRecord);

#undef DISCORDQ_ERROR

}  // namespace discordq
