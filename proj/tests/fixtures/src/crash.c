#include <stdio.h>

int main(void) {
  int *p = 0;
  int c = getchar();
  if (c == 'X')
    *p = 1;
  return 0;
}
