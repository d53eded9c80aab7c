void blk_end_request_all(struct request *rq, int error)
{
    blk_finish_request(rq, error);
}

static void blk_finish_request(struct request *req, int error)
{
    __blk_put_request(req);
}

void __blk_put_request(struct request *req)
{
    mempool_free(req, req_pool);
}

void mempool_free(void *element, void *pool)
{
    free(element);
}
