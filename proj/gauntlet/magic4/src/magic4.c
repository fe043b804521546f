#include <stdio.h>
#include <string.h>

int main(void) {
  char buf[64] = {0};
  size_t n = fread(buf, 1, sizeof(buf) - 1, stdin);
  if (n < 4)
    return 1;
  if (memcmp(buf, "FUZZ", 4) == 0) {
    puts("magic");
    return 0;
  }
  return 2;
}
