#include <stdio.h>

int main(void) {
  char buf[8] = {0};
  fread(buf, 1, 4, stdin);
  if (buf[2] == 'K')
    return 1;
  return 0;
}
